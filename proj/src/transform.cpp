#include "brl/transform.hpp"

#include <cmath>

#include "brl/errors.hpp"

namespace brl {

namespace {

class ProfileField final : public ScalarField {
 public:
  explicit ProfileField(ProfilePtr p) : p_(std::move(p)) {}
  double value(Vec2 x) const override { return p_->value(x); }
  Vec2 gradient(Vec2 x) const override { return p_->gradient(x); }
  std::string describe() const override { return p_->describe(); }

 private:
  ProfilePtr p_;
};

// Quadratic rule over the full span [t0, t2] of three points with interval
// lengths h1, h2.
void add_full3(std::vector<double>& w, std::size_t i, double h1, double h2) {
  const double s = h1 + h2;
  w[i] += s / 6.0 * (2.0 - h2 / h1);
  w[i + 1] += s / 6.0 * (s * s / (h1 * h2));
  w[i + 2] += s / 6.0 * (2.0 - h1 / h2);
}

// Quadratic through three points, integrated over the last interval only.
void add_tail3(std::vector<double>& w, std::size_t i, double h1, double h2) {
  w[i] += -h2 * h2 * h2 / (6.0 * h1 * (h1 + h2));
  w[i + 1] += h2 * (h2 + 3.0 * h1) / (6.0 * h1);
  w[i + 2] += h2 * (2.0 * h2 + 3.0 * h1) / (6.0 * (h1 + h2));
}

BrokenRay traced_or_throw(const Scenario& scenario, Vec2 x, double theta) {
  BrokenRay ray = trace_broken_ray(scenario, x, theta);
  if (ray.termination != Termination::ExitAtE) {
    throw RayDidNotExit("ray from (" + fmt17(x.x) + "," + fmt17(x.y) +
                        ";theta=" + fmt17(theta) + ") terminated with " +
                        termination_name(ray.termination));
  }
  return ray;
}

// Advances (x, theta) by time h with the tracer's step size; throws if a
// boundary event occurs in (0, h].
SMState advance_interior(const Scenario& scenario, Vec2 x, double theta,
                         double h) {
  SMState state{x, theta};
  double remaining = h;
  auto guard = [&](const SMState& s) {
    if (scenario.outer->event_value(s.x) >= 0.0 ||
        (scenario.obstacle && scenario.obstacle->event_value(s.x) >= 0.0)) {
      throw ReflectionPatternChanged(
          "flow advance crossed a boundary within h");
    }
  };
  while (remaining > 0.0) {
    const double dt = std::min(scenario.tol.step, remaining);
    state = step_geodesic(scenario, state, dt);
    guard(state);
    remaining -= dt;
  }
  return state;
}

}  // namespace

FieldPtr field_from_profile(ProfilePtr p) {
  return std::make_shared<ProfileField>(std::move(p));
}

FieldPtr parse_field(const std::string& text) {
  return field_from_profile(parse_profile(text));
}

std::vector<double> segment_weights(const RaySegment& seg) {
  const std::size_t n = seg.samples.size();
  std::vector<double> w(n, 0.0);
  if (n < 2) return w;
  if (n == 2) {
    const double h = seg.samples[1].t - seg.samples[0].t;
    w[0] = w[1] = 0.5 * h;
    return w;
  }
  const std::size_t m = n - 1;       // interval count
  const std::size_t u = m - 1;       // uniform interval count
  const double h = seg.samples[1].t - seg.samples[0].t;
  const double r = seg.samples[m].t - seg.samples[m - 1].t;
  if (u % 2 == 0) {
    // Simpson pairs cover all uniform intervals; the short tail is absorbed
    // by a restricted quadratic through the last three points.
    for (std::size_t i = 0; i + 2 <= u; i += 2) {
      w[i] += h / 3.0;
      w[i + 1] += 4.0 * h / 3.0;
      w[i + 2] += h / 3.0;
    }
    add_tail3(w, m - 2, h, r);
  } else {
    for (std::size_t i = 0; i + 2 <= u - 1; i += 2) {
      w[i] += h / 3.0;
      w[i + 1] += 4.0 * h / 3.0;
      w[i + 2] += h / 3.0;
    }
    add_full3(w, m - 2, h, r);
  }
  return w;
}

double integrate_along_ray(const BrokenRay& ray,
                           const std::function<double(Vec2)>& f) {
  std::vector<double> terms;
  for (const auto& seg : ray.segments) {
    const std::vector<double> w = segment_weights(seg);
    for (std::size_t i = 0; i < seg.samples.size(); ++i) {
      if (w[i] != 0.0) terms.push_back(w[i] * f(seg.samples[i].x));
    }
  }
  return pairwise_sum(terms);
}

TransformSample brt_forward(const Scenario& scenario, const ScalarField& f,
                            Vec2 x, double theta) {
  const BrokenRay ray = traced_or_throw(scenario, x, theta);
  TransformSample s;
  s.entry = {x, theta};
  s.value = integrate_along_ray(ray, [&](Vec2 p) { return f.value(p); });
  s.tau = ray.tau;
  s.n_reflections = ray.reflection_count();
  s.termination = ray.termination;
  return s;
}

std::vector<TransformSample> fan_transform(const Scenario& scenario,
                                           const ScalarField& f,
                                           const std::vector<FanEntry>& fan) {
  std::vector<TransformSample> out(fan.size());
  parallel_for(fan.size(), [&](std::size_t i) {
    TransformSample s;
    s.entry = {fan[i].x, fan[i].theta};
    s.entry_s = fan[i].entry_s;
    const BrokenRay ray = trace_broken_ray(scenario, fan[i].x, fan[i].theta);
    s.tau = ray.tau;
    s.n_reflections = ray.reflection_count();
    s.termination = ray.termination;
    if (ray.termination == Termination::ExitAtE) {
      s.value = integrate_along_ray(ray, [&](Vec2 p) { return f.value(p); });
    }
    out[i] = s;
  });
  return out;
}

double transport_residual(const Scenario& scenario, const ScalarField& f,
                          Vec2 x, double theta, double h) {
  const TransformSample u0 = brt_forward(scenario, f, x, theta);
  const SMState advanced = advance_interior(scenario, x, theta, h);
  const TransformSample uh =
      brt_forward(scenario, f, advanced.x, advanced.theta);
  if (uh.n_reflections != u0.n_reflections) {
    throw ReflectionPatternChanged(
        "h-advanced ray has a different reflection count");
  }
  return std::abs((uh.value - u0.value) / h + f.value(x));
}

double symmetry_residual(const Scenario& scenario, const ScalarField& f,
                         Vec2 x, double theta) {
  const TransformSample fwd = brt_forward(scenario, f, x, theta);
  const TransformSample bwd = brt_forward(scenario, f, x, theta + kPi);
  // The full broken ray through (x, v) enters E where the backward ray
  // exits, with reversed direction.
  const BrokenRay back = traced_or_throw(scenario, x, theta + kPi);
  const TransformSample full =
      brt_forward(scenario, f, back.exit.x, back.exit.theta + kPi);
  return std::abs(fwd.value + bwd.value - full.value);
}

BoundaryRecovery boundary_recovery(const Scenario& scenario,
                                   const BoundaryData& data, Vec2 x,
                                   double h) {
  const BoundaryFrame frame =
      boundary_frame(scenario.surface, *scenario.outer, x, 1e-6);
  if (frame.kappa <= 0.0) {
    throw Error("boundary recovery requires strict convexity at the point");
  }

  auto chord_tau = [&](double psi) {
    const BrokenRay ray =
        trace_broken_ray(scenario, x, frame.alpha + psi);
    if (ray.reflection_count() > 0) {
      throw ObstacleInTheWay("short chord reflects on the obstacle");
    }
    if (ray.termination != Termination::ExitAtE) {
      throw RayDidNotExit("short chord did not exit");
    }
    return ray.tau;
  };

  // Secant iteration on the angle from the tangent so the traced chord has
  // the requested length; the convex-boundary model tau ~ 2 psi / kappa
  // seeds it.
  auto ratio_at_length = [&](double len) {
    double psi0 = 0.5 * frame.kappa * len;
    double f0 = chord_tau(psi0) - len;
    double psi1 = psi0 * 1.1;
    double f1 = chord_tau(psi1) - len;
    for (int it = 0; it < 30 && std::abs(f1) > 1e-5 * len; ++it) {
      const double dpsi = f1 * (psi1 - psi0) / (f1 - f0);
      psi0 = psi1;
      f0 = f1;
      psi1 -= dpsi;
      f1 = chord_tau(psi1) - len;
    }
    const double tau = f1 + len;
    return data(x, wrap_angle(frame.alpha + psi1)) / tau;
  };

  BoundaryRecovery out;
  out.ratios[0] = ratio_at_length(h);
  out.ratios[1] = ratio_at_length(0.5 * h);
  out.ratios[2] = ratio_at_length(0.25 * h);
  const double r1a = 2.0 * out.ratios[1] - out.ratios[0];
  const double r1b = 2.0 * out.ratios[2] - out.ratios[1];
  out.estimate = (4.0 * r1b - r1a) / 3.0;
  return out;
}

}  // namespace brl
