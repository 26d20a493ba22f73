#include "brl/jacobi.hpp"

#include <algorithm>
#include <cmath>

#include "brl/errors.hpp"

namespace brl {

namespace {

Mat2 from_action(const std::function<Vec2(Vec2)>& f) {
  const Vec2 c1 = f({1.0, 0.0});
  const Vec2 c2 = f({0.0, 1.0});
  return {c1.x, c2.x, c1.y, c2.y};
}

double fit_slope(const std::vector<double>& xs, const std::vector<double>& ys) {
  const std::size_t n = xs.size();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sx += xs[i];
    sy += ys[i];
    sxx += xs[i] * xs[i];
    sxy += xs[i] * ys[i];
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

struct JacobiState {
  SMState base;
  Vec2 J, W;  // W = Cartesian components of D_t J
};

struct JacobiDeriv {
  double dx, dy, dtheta;
  Vec2 dJ, dW;
};

JacobiDeriv jacobi_rhs(const ConformalSurface& surf, const JacobiState& s) {
  const double lam = surf.lambda(s.base.x);
  const Vec2 dl = surf.grad_lambda(s.base.x);
  const double e = std::exp(-lam);
  const double c = std::cos(s.base.theta), sn = std::sin(s.base.theta);
  const Vec2 v{e * c, e * sn};

  JacobiDeriv d;
  d.dx = v.x;
  d.dy = v.y;
  d.dtheta = e * (-dl.x * sn + dl.y * c);

  // J' = W - Gamma(v, J); W' = -K (J - <J,v>_g v) - Gamma(v, W).
  auto gamma = [&](Vec2 u, Vec2 w) {
    return dot(dl, u) * w + dot(dl, w) * u - dot(u, w) * dl;
  };
  const double K = surf.gauss_curvature(s.base.x);
  const double e2 = std::exp(2.0 * lam);
  const Vec2 j_norm = s.J - (e2 * dot(s.J, v)) * v;
  d.dJ = s.W - gamma(v, s.J);
  d.dW = (-K) * j_norm - gamma(v, s.W);
  return d;
}

JacobiState jacobi_rk4(const ConformalSurface& surf, const JacobiState& u,
                       double dt) {
  auto advance = [&](const JacobiState& s, const JacobiDeriv& k, double f) {
    JacobiState o;
    o.base.x = {s.base.x.x + f * k.dx, s.base.x.y + f * k.dy};
    o.base.theta = s.base.theta + f * k.dtheta;
    o.J = s.J + f * k.dJ;
    o.W = s.W + f * k.dW;
    return o;
  };
  const JacobiDeriv k1 = jacobi_rhs(surf, u);
  const JacobiDeriv k2 = jacobi_rhs(surf, advance(u, k1, 0.5 * dt));
  const JacobiDeriv k3 = jacobi_rhs(surf, advance(u, k2, 0.5 * dt));
  const JacobiDeriv k4 = jacobi_rhs(surf, advance(u, k3, dt));
  JacobiState o;
  o.base.x.x = u.base.x.x + dt / 6.0 * (k1.dx + 2 * k2.dx + 2 * k3.dx + k4.dx);
  o.base.x.y = u.base.x.y + dt / 6.0 * (k1.dy + 2 * k2.dy + 2 * k3.dy + k4.dy);
  o.base.theta =
      u.base.theta + dt / 6.0 * (k1.dtheta + 2 * k2.dtheta + 2 * k3.dtheta + k4.dtheta);
  o.J = u.J + dt / 6.0 * (k1.dJ + 2.0 * k2.dJ + 2.0 * k3.dJ + k4.dJ);
  o.W = u.W + dt / 6.0 * (k1.dW + 2.0 * k2.dW + 2.0 * k3.dW + k4.dW);
  return o;
}

}  // namespace

Vec2 phi_project(const ConformalSurface& surface, Vec2 x, Vec2 zeta, Vec2 xi,
                 Vec2 nu, double abort_tol) {
  const double zn = surface.metric_dot(x, zeta, nu);
  if (std::abs(zn) < abort_tol) {
    throw TangentialDirection("phi projection at tangential incidence " +
                              fmt17(zn));
  }
  const double xn = surface.metric_dot(x, xi, nu);
  return xi - (xn / zn) * zeta;
}

Vec2 Phi_map(const Scenario& scenario, const BoundaryCurve& curve, Vec2 x,
             Vec2 zeta, Vec2 xi) {
  const BoundaryFrame f = boundary_frame(scenario.surface, curve, x);
  const Vec2 p = phi_project(scenario.surface, x, zeta, xi, f.nu,
                             scenario.tol.tangential_abort_tol);
  // Shape operator on the boundary tangent line: s(w) = kappa w.
  const Vec2 sp = f.kappa * p;
  const double c_sp = scenario.surface.metric_dot(x, sp, zeta);
  const double c_nu = scenario.surface.metric_dot(x, f.nu, zeta);
  return 2.0 * (c_sp * f.nu + c_nu * sp);
}

JumpMaps make_jump_maps(const Scenario& scenario, const BoundaryCurve& curve,
                        Vec2 x, Vec2 zeta) {
  const BoundaryFrame f = boundary_frame(scenario.surface, curve, x);
  JumpMaps m;
  m.x = x;
  m.nu = f.nu;
  m.T = f.T;
  m.kappa = f.kappa;
  m.zeta = zeta;
  const ConformalSurface& surf = scenario.surface;
  m.rho = from_action([&](Vec2 v) {
    return v - 2.0 * surf.metric_dot(x, v, f.nu) * f.nu;
  });
  m.phi = from_action([&](Vec2 v) {
    return phi_project(surf, x, zeta, v, f.nu,
                       scenario.tol.tangential_abort_tol);
  });
  m.Phi = from_action([&](Vec2 v) {
    return Phi_map(scenario, curve, x, zeta, v);
  });
  return m;
}

std::pair<Vec2, Vec2> reflect_jacobi(const JumpMaps& maps, Vec2 J_minus,
                                     Vec2 DJ_minus) {
  const Vec2 J_plus = apply(maps.rho, J_minus);
  const Vec2 DJ_plus = apply(maps.rho, DJ_minus) - apply(maps.Phi, J_minus);
  return {J_plus, DJ_plus};
}

std::pair<Vec2, Vec2> reflect_jacobi_backward(const Scenario& scenario,
                                              const BoundaryCurve& curve,
                                              Vec2 x, Vec2 zeta_out,
                                              Vec2 J_plus, Vec2 DJ_plus) {
  const JumpMaps maps = make_jump_maps(scenario, curve, x, zeta_out);
  const Vec2 J_minus = apply(maps.rho, J_plus);
  const Vec2 DJ_minus = apply(maps.rho, DJ_plus) - apply(maps.Phi, J_plus);
  return {J_minus, DJ_minus};
}

JacobiFrame propagate_jacobi(const Scenario& scenario, const BrokenRay& ray,
                             Vec2 J0, Vec2 DJ0) {
  if (ray.termination == Termination::TangentialAbort) {
    throw TangentialDirection(
        "cannot propagate Jacobi data through a tangential abort");
  }
  JacobiFrame frame;
  JacobiState state;
  state.J = J0;
  state.W = DJ0;

  std::size_t next_refl = 0;
  // A reflection recorded at t = 0 was applied before the first segment.
  while (next_refl < ray.reflections.size() &&
         !ray.segments.empty() &&
         ray.reflections[next_refl].t <= ray.segments.front().t0) {
    ++next_refl;
  }

  for (std::size_t si = 0; si < ray.segments.size(); ++si) {
    const RaySegment& seg = ray.segments[si];
    if (seg.samples.empty()) continue;
    state.base = {seg.samples[0].x, seg.samples[0].theta};
    frame.samples.push_back(
        {seg.samples[0].t, static_cast<int>(si), state.J, state.W});
    for (std::size_t k = 1; k < seg.samples.size(); ++k) {
      const double dt = seg.samples[k].t - seg.samples[k - 1].t;
      state = jacobi_rk4(scenario.surface, state, dt);
      frame.samples.push_back(
          {seg.samples[k].t, static_cast<int>(si), state.J, state.W});
    }
    if (next_refl < ray.reflections.size() &&
        std::abs(ray.reflections[next_refl].t - seg.t1) < 1e-12) {
      const ReflectionEvent& ev = ray.reflections[next_refl];
      const JumpMaps maps =
          make_jump_maps(scenario, *scenario.obstacle, ev.x, ev.v_in);
      JumpRecord rec;
      rec.t = ev.t;
      rec.x = ev.x;
      rec.J_minus = state.J;
      rec.DJ_minus = state.W;
      auto [jp, djp] = reflect_jacobi(maps, state.J, state.W);
      rec.J_plus = jp;
      rec.DJ_plus = djp;
      frame.jumps.push_back(rec);
      state.J = jp;
      state.W = djp;
      ++next_refl;
    }
  }
  return frame;
}

std::pair<Vec2, Vec2> variation_initial_data(const ConformalSurface& surface,
                                             Vec2 x0, double theta0, Vec2 dx,
                                             double dtheta) {
  const double e = std::exp(-surface.lambda(x0));
  const Vec2 dl = surface.grad_lambda(x0);
  const Vec2 omega{std::cos(theta0), std::sin(theta0)};
  const Vec2 omega_perp{-std::sin(theta0), std::cos(theta0)};
  const Vec2 v0 = e * omega;
  // d/ds v(x_s, theta_s)|_0 plus the Christoffel correction makes DJ(0)
  // covariant.
  const Vec2 dv = e * (-dot(dl, dx)) * omega + e * dtheta * omega_perp;
  const Vec2 DJ0 = dv + surface.christoffel_apply(x0, dx, v0);
  return {dx, DJ0};
}

SMState ray_state_at(const Scenario& scenario, const BrokenRay& ray, double t) {
  if (ray.segments.empty()) return ray.entry;
  if (t <= ray.segments.front().samples.front().t)
    return {ray.segments.front().samples.front().x,
            ray.segments.front().samples.front().theta};
  for (const auto& seg : ray.segments) {
    if (t > seg.t1 || seg.samples.size() < 2) continue;
    // Uniform spacing within the segment except the final short interval.
    const double h = seg.samples[1].t - seg.samples[0].t;
    std::size_t k = std::min<std::size_t>(
        seg.samples.size() - 2,
        static_cast<std::size_t>(std::max(0.0, (t - seg.samples[0].t) / h)));
    while (k > 0 && seg.samples[k].t > t) --k;
    while (k + 2 < seg.samples.size() && seg.samples[k + 1].t < t) ++k;
    const SMState base{seg.samples[k].x, seg.samples[k].theta};
    const double dt = t - seg.samples[k].t;
    if (dt <= 0.0) return base;
    return step_geodesic(scenario, base, dt);
  }
  const RaySample& last = ray.segments.back().samples.back();
  return {last.x, last.theta};
}

FdCheckResult fd_variation_check(const Scenario& scenario, Vec2 x0,
                                 double theta0, Vec2 dx, double dtheta,
                                 const std::vector<double>& s_values) {
  const BrokenRay base = trace_broken_ray(scenario, x0, theta0);
  auto [J0, DJ0] =
      variation_initial_data(scenario.surface, x0, theta0, dx, dtheta);
  const JacobiFrame frame = propagate_jacobi(scenario, base, J0, DJ0);

  FdCheckResult out;
  out.s_values = s_values;
  const double s_max = *std::max_element(s_values.begin(), s_values.end());

  // Probe at base-ray sample times away from the ends and from reflections.
  std::vector<std::size_t> probes;
  const std::size_t total = frame.samples.size();
  for (std::size_t k = 0; k < total; k += std::max<std::size_t>(1, total / 64)) {
    const double t = frame.samples[k].t;
    if (t < 4.0 * scenario.tol.step || t > base.tau - 4.0 * scenario.tol.step)
      continue;
    bool near_refl = false;
    for (const auto& ev : base.reflections)
      if (std::abs(t - ev.t) < 2.0 * s_max + 2.0 * scenario.tol.step)
        near_refl = true;
    if (!near_refl) probes.push_back(k);
  }

  for (double s : s_values) {
    const BrokenRay plus =
        trace_broken_ray(scenario, x0 + s * dx, theta0 + s * dtheta);
    const BrokenRay minus =
        trace_broken_ray(scenario, x0 - s * dx, theta0 - s * dtheta);
    if (plus.reflection_count() != base.reflection_count() ||
        minus.reflection_count() != base.reflection_count()) {
      throw ReflectionPatternChanged(
          "perturbed rays changed reflection count at s = " + fmt17(s));
    }
    double err = 0.0;
    for (std::size_t k : probes) {
      const double t = frame.samples[k].t;
      if (t > std::min(plus.tau, minus.tau)) continue;
      const SMState sp = ray_state_at(scenario, plus, t);
      const SMState sm = ray_state_at(scenario, minus, t);
      const Vec2 fd = (sp.x - sm.x) / (2.0 * s);
      err = std::max(err, norm(fd - frame.samples[k].J));
    }
    out.errors.push_back(err);
  }

  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < s_values.size(); ++i) {
    if (out.errors[i] > 0.0) {
      lx.push_back(std::log(s_values[i]));
      ly.push_back(std::log(out.errors[i]));
    }
  }
  out.order = lx.size() >= 2 ? fit_slope(lx, ly) : 0.0;
  return out;
}

GrowthEnvelope growth_envelope(const Scenario& scenario, const BrokenRay& ray,
                               const JacobiFrame& frame) {
  GrowthEnvelope env;

  // Z(t)^2 in g-norms, indexed like the frame samples.
  std::vector<double> z2(frame.samples.size(), 0.0);
  std::vector<double> ts(frame.samples.size(), 0.0);
  {
    std::size_t k = 0;
    for (const auto& seg : ray.segments) {
      for (const auto& smp : seg.samples) {
        const double e2 = std::exp(2.0 * scenario.surface.lambda(smp.x));
        const auto& fs = frame.samples[k];
        z2[k] = e2 * (norm2(fs.J) + norm2(fs.DJ));
        ts[k] = fs.t;
        ++k;
      }
    }
  }
  if (z2.empty() || z2.front() <= 0.0) return env;

  std::vector<double> m(z2.size());
  for (std::size_t i = 0; i < z2.size(); ++i)
    m[i] = std::log(std::max(z2[i], 1e-300) / z2.front());

  // Least-squares line, then lift the intercept to dominate every sample.
  double b = ts.size() >= 2 ? fit_slope(ts, m) : 0.0;
  b = std::max(b, 0.0);
  double a = -1e300;
  for (std::size_t i = 0; i < m.size(); ++i) a = std::max(a, m[i] - b * ts[i]);
  env.A = std::exp(a + 1e-12);
  env.B = b;
  for (std::size_t i = 0; i < m.size(); ++i)
    if (m[i] > std::log(env.A) + env.B * ts[i]) ++env.violations;

  // Segment-wise Gronwall bound from the curvature estimate.
  double maxK = 0.0;
  const double R = scenario.outer->bound_radius();
  const int n = 101;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const Vec2 x{-R + 2.0 * R * i / (n - 1), -R + 2.0 * R * j / (n - 1)};
      if (!inside_surface(scenario, x)) continue;
      maxK = std::max(maxK, std::abs(scenario.surface.gauss_curvature(x)));
    }
  env.gronwall_C = 2.0 * std::max(1.0, maxK);
  {
    std::size_t k = 0;
    for (const auto& seg : ray.segments) {
      if (seg.samples.empty()) continue;
      const std::size_t k0 = k;
      for (std::size_t j = 0; j < seg.samples.size(); ++j, ++k) {
        if (m[k] - m[k0] > env.gronwall_C * (ts[k] - ts[k0]) + 1e-9)
          ++env.gronwall_violations;
      }
    }
  }
  return env;
}

double blowup_scaling_exponent(const Scenario& scenario,
                               const BoundaryCurve& curve, Vec2 x, Vec2 J,
                               const std::vector<double>& incidences) {
  const BoundaryFrame f = boundary_frame(scenario.surface, curve, x);
  std::vector<double> lx, ly;
  for (double mu : incidences) {
    const Vec2 zeta = mu * f.nu + std::sqrt(1.0 - mu * mu) * f.T;
    const Vec2 phi_j = Phi_map(scenario, curve, x, zeta, J);
    const double mag = scenario.surface.metric_norm(x, phi_j);
    if (mag > 0.0) {
      lx.push_back(std::log(mu));
      ly.push_back(std::log(mag));
    }
  }
  return lx.size() >= 2 ? fit_slope(lx, ly) : 0.0;
}

}  // namespace brl
