#include "brl/lens.hpp"

#include <cmath>
#include <memory>
#include <sstream>
#include <utility>

#include "brl/common.hpp"
#include "brl/errors.hpp"
#include "brl/raytrace.hpp"

namespace brl {

namespace {

class PerturbedProfile final : public ScalarProfile {
 public:
  PerturbedProfile(ProfilePtr base, ProfilePtr h, double s)
      : base_(std::move(base)), h_(std::move(h)), s_(s) {}

  double value(Vec2 x) const override {
    return base_->value(x) + s_ * h_->value(x);
  }
  Vec2 gradient(Vec2 x) const override {
    return base_->gradient(x) + s_ * h_->gradient(x);
  }
  Mat2 hessian(Vec2 x) const override {
    return base_->hessian(x) + s_ * h_->hessian(x);
  }
  std::string describe() const override {
    std::ostringstream os;
    os << base_->describe() << "+" << fmt17(s_) << "*" << h_->describe();
    return os.str();
  }

 private:
  ProfilePtr base_, h_;
  double s_;
};

double five_point(double f_m2, double f_m1, double f_p1, double f_p2, double s) {
  return (-f_p2 + 8.0 * f_p1 - 8.0 * f_m1 + f_m2) / (12.0 * s);
}

// g-inner product of the unit vector with fiber angle theta against the
// coordinate vector w: scale factors collapse to a single conformal weight.
double metric_pairing(const ConformalSurface& surface, Vec2 x, double theta,
                      Vec2 w) {
  return surface.conf(x) * dot(Vec2{std::cos(theta), std::sin(theta)}, w);
}

}  // namespace

Scenario MetricFamily::scenario_at(double s) const {
  if (s == 0.0) return base;
  Scenario scen = base;
  scen.surface = ConformalSurface(
      std::make_shared<PerturbedProfile>(base.surface.lambda_shared(), h, s));
  return scen;
}

MetricFamily make_metric_family(const Scenario& base, ProfilePtr h) {
  if (!h) throw SchemaError("metric family: missing perturbation profile");
  return MetricFamily{base, std::move(h)};
}

MetricFamily make_metric_family(const Scenario& base, const std::string& h_spec) {
  return make_metric_family(base, parse_profile(h_spec));
}

TravelData perturbed_travel_data(const MetricFamily& family, Vec2 x0,
                                 double theta0, double s) {
  const Scenario scen = family.scenario_at(s);
  const BrokenRay ray = trace_broken_ray(scen, x0, theta0);
  if (ray.termination != Termination::ExitAtE) {
    throw RayDidNotExit("perturbed ray terminated with " +
                        termination_name(ray.termination));
  }
  return TravelData{ray.tau, ray.exit.x, ray.exit.theta,
                    ray.reflection_count()};
}

namespace {

struct Stencil {
  TravelData base;
  TravelData m2, m1, p1, p2;
};

Stencil travel_stencil(const MetricFamily& family, Vec2 x0, double theta0,
                       double s_fd) {
  Stencil st;
  st.base = perturbed_travel_data(family, x0, theta0, 0.0);
  st.m2 = perturbed_travel_data(family, x0, theta0, -2.0 * s_fd);
  st.m1 = perturbed_travel_data(family, x0, theta0, -s_fd);
  st.p1 = perturbed_travel_data(family, x0, theta0, s_fd);
  st.p2 = perturbed_travel_data(family, x0, theta0, 2.0 * s_fd);
  for (const TravelData* d : {&st.m2, &st.m1, &st.p1, &st.p2}) {
    if (d->reflections != st.base.reflections) {
      throw ReflectionPatternChanged(
          "reflection pattern varies across the lens stencil; reduce s_fd");
    }
  }
  return st;
}

// d/ds of the exit point, computed in the arclength coordinate of the outer
// curve (the exit points stay on the curve, so only the tangential motion is
// real) and returned as a coordinate tangent vector.
Vec2 exit_derivative(const BoundaryCurve& outer, Vec2 exit0, const Stencil& st,
                     double s_fd) {
  const double L = outer.total_length();
  const double u0 = outer.arclength_of(exit0);
  const auto offset = [&](const TravelData& d) {
    return std::remainder(outer.arclength_of(d.exit_x) - u0, L);
  };
  const double du = five_point(offset(st.m2), offset(st.m1), offset(st.p1),
                               offset(st.p2), s_fd);
  return du * outer.tangent_euclid(exit0);
}

}  // namespace

LinearizationReport linearization_residual(const MetricFamily& family, Vec2 x0,
                                           double theta0, double s_fd) {
  if (s_fd <= 0.0) throw SchemaError("linearization: s_fd must be positive");
  const FieldPtr h_field = field_from_profile(family.h);
  const TransformSample base = brt_forward(family.base, *h_field, x0, theta0);
  if (!base.ok()) {
    throw RayDidNotExit("base ray terminated with " +
                        termination_name(base.termination));
  }

  const Stencil st = travel_stencil(family, x0, theta0, s_fd);
  LinearizationReport rep;
  rep.lhs = base.value;
  rep.s_fd = s_fd;
  rep.reflections = base.n_reflections;
  rep.minimizing_hint = base.n_reflections == 0;
  rep.rhs_tau = five_point(st.m2.tau, st.m1.tau, st.p1.tau, st.p2.tau, s_fd);

  const Vec2 dexit =
      exit_derivative(*family.base.outer, st.base.exit_x, st, s_fd);
  rep.rhs_endpoint = metric_pairing(family.base.surface, st.base.exit_x,
                                    st.base.exit_theta, dexit);
  rep.residual = std::abs(rep.lhs - (rep.rhs_tau - rep.rhs_endpoint));
  rep.residual_no_endpoint = std::abs(rep.lhs - rep.rhs_tau);
  return rep;
}

GeodesicLinearizationReport geodesic_linearization_check(
    const MetricFamily& family, double entry_s, double theta0, double ds_entry,
    double dtheta, double s_fd) {
  if (s_fd <= 0.0) throw SchemaError("linearization: s_fd must be positive");
  const BoundaryCurve& outer = *family.base.outer;
  const Vec2 x0 = outer.point_at(entry_s);

  const FieldPtr h_field = field_from_profile(family.h);
  const TransformSample base = brt_forward(family.base, *h_field, x0, theta0);
  if (!base.ok()) {
    throw RayDidNotExit("base ray terminated with " +
                        termination_name(base.termination));
  }

  const auto probe = [&](double s) {
    const Scenario scen = family.scenario_at(s);
    const BrokenRay ray = trace_broken_ray(scen, outer.point_at(entry_s + ds_entry * s),
                                           theta0 + dtheta * s);
    if (ray.termination != Termination::ExitAtE) {
      throw RayDidNotExit("perturbed ray terminated with " +
                          termination_name(ray.termination));
    }
    if (ray.reflection_count() != base.n_reflections) {
      throw ReflectionPatternChanged(
          "reflection pattern varies across the lens stencil; reduce s_fd");
    }
    return TravelData{ray.tau, ray.exit.x, ray.exit.theta,
                      ray.reflection_count()};
  };

  Stencil st;
  st.base = probe(0.0);
  st.m2 = probe(-2.0 * s_fd);
  st.m1 = probe(-s_fd);
  st.p1 = probe(s_fd);
  st.p2 = probe(2.0 * s_fd);

  GeodesicLinearizationReport rep;
  rep.lhs = base.value;
  rep.s_fd = s_fd;
  rep.reflections = base.n_reflections;
  rep.rhs_tau = five_point(st.m2.tau, st.m1.tau, st.p1.tau, st.p2.tau, s_fd);

  // The entry point slides along the outer curve at the prescribed rate, so
  // its s-derivative is exact: ds_entry times the unit tangent.
  rep.rhs_entry = metric_pairing(family.base.surface, x0, theta0,
                                 ds_entry * outer.tangent_euclid(x0));

  const Vec2 dexit = exit_derivative(outer, st.base.exit_x, st, s_fd);
  rep.rhs_exit = metric_pairing(family.base.surface, st.base.exit_x,
                                st.base.exit_theta, dexit);
  rep.residual =
      std::abs(rep.lhs - (rep.rhs_tau + rep.rhs_entry - rep.rhs_exit));
  return rep;
}

double pattern_stable_step(const MetricFamily& family, Vec2 x0, double theta0,
                           double s_max) {
  if (s_max <= 0.0) throw SchemaError("pattern probe: s_max must be positive");
  double s = s_max;
  for (int i = 0; i < 40; ++i, s *= 0.5) {
    try {
      travel_stencil(family, x0, theta0, s);
      return s;
    } catch (const Error&) {
      // pattern broke or a stencil ray failed to exit; halve and retry
    }
  }
  return 0.0;
}

}  // namespace brl
