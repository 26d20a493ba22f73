#include "brl/raytrace.hpp"

#include <algorithm>
#include <cmath>

#include "brl/errors.hpp"

namespace brl {

namespace {

constexpr double kOnBoundaryTol = 1e-7;

struct Deriv {
  double dx, dy, dtheta;
};

// Geodesic flow in circle-bundle coordinates:
//   x' = e^{-lambda} omega_theta,
//   theta' = e^{-lambda} (-d1(lambda) sin theta + d2(lambda) cos theta).
Deriv rhs(const ConformalSurface& surf, Vec2 x, double theta) {
  const double e = std::exp(-surf.lambda(x));
  const Vec2 dl = surf.grad_lambda(x);
  const double c = std::cos(theta), s = std::sin(theta);
  return {e * c, e * s, e * (-dl.x * s + dl.y * c)};
}

SMState rk4(const ConformalSurface& surf, const SMState& u, double dt) {
  const Deriv k1 = rhs(surf, u.x, u.theta);
  const Deriv k2 = rhs(surf, {u.x.x + 0.5 * dt * k1.dx, u.x.y + 0.5 * dt * k1.dy},
                       u.theta + 0.5 * dt * k1.dtheta);
  const Deriv k3 = rhs(surf, {u.x.x + 0.5 * dt * k2.dx, u.x.y + 0.5 * dt * k2.dy},
                       u.theta + 0.5 * dt * k2.dtheta);
  const Deriv k4 = rhs(surf, {u.x.x + dt * k3.dx, u.x.y + dt * k3.dy},
                       u.theta + dt * k3.dtheta);
  SMState out;
  out.x.x = u.x.x + dt / 6.0 * (k1.dx + 2.0 * k2.dx + 2.0 * k3.dx + k4.dx);
  out.x.y = u.x.y + dt / 6.0 * (k1.dy + 2.0 * k2.dy + 2.0 * k3.dy + k4.dy);
  out.theta =
      u.theta + dt / 6.0 * (k1.dtheta + 2.0 * k2.dtheta + 2.0 * k3.dtheta + k4.dtheta);
  return out;
}

// Bisects the crossing time of `curve` inside (0, dt], starting from state u
// where the event function is negative at 0 and non-negative at dt. Returns
// the crossing offset and the state there (on the non-negative side).
std::pair<double, SMState> refine_crossing(const Scenario& scn,
                                           const BoundaryCurve& curve,
                                           const SMState& u, double dt) {
  double lo = 0.0, hi = dt;
  SMState hi_state = rk4(scn.surface, u, dt);
  for (int it = 0; it < 40; ++it) {
    const double mid = 0.5 * (lo + hi);
    const SMState ms = rk4(scn.surface, u, mid);
    const double g = curve.event_value(ms.x);
    if (g < 0.0) {
      lo = mid;
    } else {
      hi = mid;
      hi_state = ms;
      if (g <= scn.tol.event_tol) break;
    }
  }
  if (curve.event_value(hi_state.x) > 10.0 * scn.tol.event_tol) {
    throw EventLocalizationFailure(
        "boundary crossing did not converge to event_tol near (" +
        fmt17(hi_state.x.x) + "," + fmt17(hi_state.x.y) + ")");
  }
  return {hi, hi_state};
}

}  // namespace

SMState step_geodesic(const Scenario& scenario, const SMState& state, double dt) {
  SMState out = rk4(scenario.surface, state, dt);
  if (norm(out.x) > scenario.enclosing_radius) {
    throw LeftDomain("geodesic left the enclosing disc at (" +
                     fmt17(out.x.x) + "," + fmt17(out.x.y) + ")");
  }
  return out;
}

Vec2 reflect_direction(const Scenario& scenario, const BoundaryCurve& curve,
                       Vec2 x, Vec2 v_in) {
  const BoundaryFrame f = boundary_frame(scenario.surface, curve, x);
  const double c = scenario.surface.metric_dot(x, v_in, f.nu);
  return v_in - 2.0 * c * f.nu;
}

BrokenRay trace_broken_ray(const Scenario& scenario, Vec2 x0, Vec2 v0) {
  return trace_broken_ray(scenario, x0, ConformalSurface::angle_of(v0));
}

BrokenRay trace_broken_ray(const Scenario& scenario, Vec2 x0, double theta0) {
  const ConformalSurface& surf = scenario.surface;
  const BoundaryCurve& outer = *scenario.outer;
  const BoundaryCurve* obstacle = scenario.obstacle.get();
  const double nudge = 10.0 * scenario.tol.event_tol;

  BrokenRay ray;
  ray.entry = {x0, wrap_angle(theta0)};

  SMState state = ray.entry;

  // Boundary-start handling on E: outward or tangential starts exit at once.
  const double ev_e0 = outer.event_value(state.x);
  if (ev_e0 > kOnBoundaryTol) {
    throw LeftDomain("ray start lies outside the outer boundary");
  }
  if (std::abs(ev_e0) <= kOnBoundaryTol) {
    const BoundaryFrame f = boundary_frame(surf, outer, state.x, kOnBoundaryTol);
    const Vec2 v = surf.direction(state.x, state.theta);
    if (surf.metric_dot(state.x, v, f.nu) >= 0.0) {
      ray.termination = Termination::ExitAtE;
      ray.tau = 0.0;
      ray.exit = state;
      return ray;
    }
    state.x -= nudge * f.nu_e;
  }

  // Boundary-start handling on R: a start pointing into the obstacle
  // reflects at t = 0, making the transform reflection-even on SR.
  if (obstacle) {
    const double ev_r0 = obstacle->event_value(state.x);
    if (ev_r0 > kOnBoundaryTol) {
      throw LeftDomain("ray start lies inside the obstacle");
    }
    if (std::abs(ev_r0) <= kOnBoundaryTol) {
      const BoundaryFrame f =
          boundary_frame(surf, *obstacle, state.x, kOnBoundaryTol);
      const Vec2 v = surf.direction(state.x, state.theta);
      const double c = surf.metric_dot(state.x, v, f.nu);
      if (c > 0.0) {
        if (c < scenario.tol.tangential_abort_tol) {
          ray.termination = Termination::TangentialAbort;
          ray.tau = 0.0;
          return ray;
        }
        const Vec2 v_out = v - 2.0 * c * f.nu;
        ReflectionEvent ev;
        ev.t = 0.0;
        ev.x = state.x;
        ev.v_in = v;
        ev.v_out = v_out;
        ev.incidence = c;
        ev.tangential_flag = c < scenario.a;
        ray.reflections.push_back(ev);
        state.theta = ConformalSurface::angle_of(v_out);
      }
      state.x -= nudge * f.nu_e;
    }
  }

  double t = 0.0;
  RaySegment seg;
  seg.t0 = t;
  seg.samples.push_back({t, state.x, state.theta});

  auto close_segment = [&](double t_end) {
    seg.t1 = t_end;
    ray.segments.push_back(std::move(seg));
    seg = RaySegment{};
  };

  double ev_e = outer.event_value(state.x);
  double ev_r = obstacle ? obstacle->event_value(state.x) : -1.0;

  while (true) {
    const double dt = std::min(scenario.tol.step, scenario.L - t);
    if (dt <= 0.0) {
      ray.termination = Termination::MaxTimeExceeded;
      ray.tau = t;
      close_segment(t);
      return ray;
    }
    const SMState next = step_geodesic(scenario, state, dt);
    const double ev_e_next = outer.event_value(next.x);
    const double ev_r_next = obstacle ? obstacle->event_value(next.x) : -1.0;

    const bool cross_e = ev_e < 0.0 && ev_e_next >= 0.0;
    const bool cross_r = obstacle && ev_r < 0.0 && ev_r_next >= 0.0;

    if (!cross_e && !cross_r) {
      t += dt;
      state = next;
      ev_e = ev_e_next;
      ev_r = ev_r_next;
      seg.samples.push_back({t, state.x, state.theta});
      if (t >= scenario.L) {
        ray.termination = Termination::MaxTimeExceeded;
        ray.tau = t;
        close_segment(t);
        return ray;
      }
      continue;
    }

    // Refine whichever crossings occurred; take the earliest.
    double dt_cross = dt;
    SMState cross_state = next;
    bool is_outer = true;
    if (cross_e) {
      auto [d, s] = refine_crossing(scenario, outer, state, dt);
      dt_cross = d;
      cross_state = s;
    }
    if (cross_r) {
      auto [d, s] = refine_crossing(scenario, *obstacle, state, dt);
      if (!cross_e || d < dt_cross) {
        dt_cross = d;
        cross_state = s;
        is_outer = false;
      }
    }

    const double t_cross = t + dt_cross;
    seg.samples.push_back({t_cross, cross_state.x, cross_state.theta});
    close_segment(t_cross);

    if (is_outer) {
      ray.termination = Termination::ExitAtE;
      ray.tau = t_cross;
      ray.exit = cross_state;
      return ray;
    }

    // Reflection on R.
    const BoundaryFrame f =
        boundary_frame(surf, *obstacle, cross_state.x, kOnBoundaryTol);
    const Vec2 v_in = surf.direction(cross_state.x, cross_state.theta);
    const double c = surf.metric_dot(cross_state.x, v_in, f.nu);
    if (c < scenario.tol.tangential_abort_tol) {
      ray.termination = Termination::TangentialAbort;
      ray.tau = t_cross;
      return ray;
    }
    const Vec2 v_out = v_in - 2.0 * c * f.nu;
    ReflectionEvent ev;
    ev.t = t_cross;
    ev.x = cross_state.x;
    ev.v_in = v_in;
    ev.v_out = v_out;
    ev.incidence = c;
    ev.tangential_flag = c < scenario.a;
    ray.reflections.push_back(ev);

    if (static_cast<int>(ray.reflections.size()) >= scenario.tol.max_reflections) {
      ray.termination = Termination::MaxTimeExceeded;
      ray.tau = t_cross;
      return ray;
    }

    t = t_cross;
    state.x = cross_state.x - nudge * f.nu_e;
    state.theta = ConformalSurface::angle_of(v_out);
    seg.t0 = t;
    seg.samples.push_back({t, state.x, state.theta});
    ev_e = outer.event_value(state.x);
    ev_r = obstacle->event_value(state.x);
  }
}

std::optional<double> exit_time(const Scenario& scenario, Vec2 x0,
                                double theta0) {
  const BrokenRay ray = trace_broken_ray(scenario, x0, theta0);
  if (ray.termination == Termination::ExitAtE) return ray.tau;
  return std::nullopt;
}

std::vector<FanEntry> make_boundary_fan(const Scenario& scenario,
                                        std::size_t n_points,
                                        std::size_t n_angles) {
  const BoundaryCurve& outer = *scenario.outer;
  const double total = outer.total_length();
  std::vector<FanEntry> fan;
  fan.reserve(n_points * n_angles);
  for (std::size_t i = 0; i < n_points; ++i) {
    const double s = total * (i + 0.5) / n_points;
    const Vec2 x = outer.point_at(s);
    const BoundaryFrame f = boundary_frame(scenario.surface, outer, x, 1e-6);
    for (std::size_t j = 0; j < n_angles; ++j) {
      // Inward directions fill (alpha, alpha + pi), endpoints excluded.
      const double theta = f.alpha + kPi * (j + 1.0) / (n_angles + 1.0);
      fan.push_back({x, wrap_angle(theta), s});
    }
  }
  return fan;
}

std::vector<ScatterRow> scattering_relation(const Scenario& scenario,
                                            const std::vector<FanEntry>& fan) {
  std::vector<ScatterRow> rows(fan.size());
  parallel_for(fan.size(), [&](std::size_t i) {
    const BrokenRay ray = trace_broken_ray(scenario, fan[i].x, fan[i].theta);
    ScatterRow r;
    r.ray_id = i;
    r.entry_s = fan[i].entry_s;
    r.entry_x = fan[i].x;
    r.entry_theta = fan[i].theta;
    r.tau = ray.tau;
    r.n_reflections = ray.reflection_count();
    r.termination = ray.termination;
    if (ray.termination == Termination::ExitAtE) {
      r.exit_x = ray.exit.x;
      r.exit_theta = ray.exit.theta;
      r.exit_s = scenario.outer->arclength_of(ray.exit.x);
    }
    rows[i] = r;
  });
  return rows;
}

ConditionReport validate_scenario(const Scenario& scenario, std::size_t n_rays) {
  ConditionReport rep;

  // Curvature bound over a masked grid on the bounding box of E.
  const double R = scenario.outer->bound_radius();
  const int n = 201;
  double max_k = -1e300;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const Vec2 x{-R + 2.0 * R * i / (n - 1), -R + 2.0 * R * j / (n - 1)};
      if (!inside_surface(scenario, x, 1e-9)) continue;
      max_k = std::max(max_k, scenario.surface.gauss_curvature(x));
    }
  }
  rep.max_K = max_k;

  double min_kappa = 1e300;
  const int nb = 512;
  for (int i = 0; i < nb; ++i) {
    const Vec2 x =
        scenario.outer->point_at(scenario.outer->total_length() * i / nb);
    min_kappa =
        std::min(min_kappa, signed_curvature(scenario.surface, *scenario.outer, x));
  }
  rep.min_kappa_E = min_kappa;

  const std::size_t n_points =
      std::max<std::size_t>(1, static_cast<std::size_t>(std::sqrt(double(n_rays))));
  const std::size_t n_angles = (n_rays + n_points - 1) / n_points;
  const auto fan = make_boundary_fan(scenario, n_points, n_angles);
  rep.n_rays = fan.size();

  struct RayStat {
    double tau = 0.0;
    int n_refl = 0;
    int near_tang = 0;
    Termination term = Termination::ExitAtE;
  };
  std::vector<RayStat> stats(fan.size());
  parallel_for(fan.size(), [&](std::size_t i) {
    const BrokenRay ray = trace_broken_ray(scenario, fan[i].x, fan[i].theta);
    RayStat st;
    st.tau = ray.tau;
    st.n_refl = ray.reflection_count();
    for (const auto& ev : ray.reflections)
      if (ev.incidence < scenario.a) ++st.near_tang;
    st.term = ray.termination;
    stats[i] = st;
  });
  for (const auto& st : stats) {
    rep.max_tau = std::max(rep.max_tau, st.tau);
    rep.max_reflections = std::max(rep.max_reflections, st.n_refl);
    if (st.near_tang >= 2) ++rep.multi_near_tangential;
    if (st.n_refl >= 2) ++rep.multi_reflection;
    if (st.term == Termination::TangentialAbort) ++rep.aborted;
    if (st.term == Termination::MaxTimeExceeded) ++rep.capped;
  }
  return rep;
}

bool inside_surface(const Scenario& scenario, Vec2 x, double margin) {
  if (scenario.outer->event_value(x) >= -margin) return false;
  if (scenario.obstacle && scenario.obstacle->event_value(x) >= -margin)
    return false;
  return true;
}

std::string termination_name(Termination t) {
  switch (t) {
    case Termination::ExitAtE: return "exit";
    case Termination::MaxTimeExceeded: return "max_time";
    case Termination::TangentialAbort: return "tangential_abort";
  }
  return "unknown";
}

}  // namespace brl
