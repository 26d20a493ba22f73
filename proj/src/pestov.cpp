#include "brl/pestov.hpp"

#include <cmath>
#include <limits>

#include "brl/errors.hpp"
#include "brl/raytrace.hpp"

namespace brl {

namespace {

double rel_residual(double lhs, double rhs, double eps) {
  return std::abs(lhs - rhs) / (std::abs(lhs) + std::abs(rhs) + eps);
}

using BdryFn = std::function<double(const BoundaryNode&, double)>;

double boundary_quad(const BoundaryGrid& grid, const BdryFn& f) {
  std::vector<double> vals(grid.nodes.size(), 0.0);
  parallel_for(grid.nodes.size(), [&](std::size_t i) {
    const BoundaryNode& n = grid.nodes[i];
    double acc = 0.0;
    for (double th : grid.thetas) acc += f(n, th);
    vals[i] = acc * grid.theta_w * n.weight;
  });
  return pairwise_sum(vals);
}

// (grad_T u, Vu) and friends on one boundary component.
struct BoundaryTermIntegrands {
  const ConformalSurface& surf;
  const CircleBundleFunction& u;

  double grad_T(const BoundaryNode& n, double th) const {
    return grad_along(surf, u, n.x, th, n.frame.T_e);
  }
  // grad_T of the reflected pull-back u o rho at (x, theta); the reflection
  // angle alpha rotates along the boundary at the Euclidean curvature rate.
  double grad_T_rho(const BoundaryNode& n, double th) const {
    const double th_r = 2.0 * n.frame.alpha - th;
    const Vec2 dl = surf.grad_lambda(n.x);
    const Vec2 g = u.grad_x(n.x, th_r, 0);
    const double ut = u.dtheta(n.x, th_r, 1);
    return (dot(n.frame.T_e, g) +
            (2.0 * n.kappa_e - cross(n.frame.T_e, dl)) * ut) /
           surf.conf(n.x);
  }
};

}  // namespace

QuadratureGrid quadrature_grid(const Scenario& scenario, int n_cells,
                               int n_theta) {
  QuadratureGrid g;
  g.n_cells = n_cells;
  g.n_theta = n_theta;
  g.theta_w = kTwoPi / n_theta;
  g.thetas.resize(n_theta);
  for (int j = 0; j < n_theta; ++j) g.thetas[j] = (j + 0.5) * g.theta_w;

  const double R = scenario.outer->bound_radius();
  const double h = 2.0 * R / n_cells;
  const ConformalSurface& surf = scenario.surface;
  g.cells.reserve(static_cast<std::size_t>(n_cells) * n_cells);
  for (int iy = 0; iy < n_cells; ++iy) {
    for (int ix = 0; ix < n_cells; ++ix) {
      const Vec2 c{-R + (ix + 0.5) * h, -R + (iy + 0.5) * h};
      int in = 0;
      for (const Vec2 p : {c, Vec2{c.x - 0.5 * h, c.y - 0.5 * h},
                           Vec2{c.x + 0.5 * h, c.y - 0.5 * h},
                           Vec2{c.x - 0.5 * h, c.y + 0.5 * h},
                           Vec2{c.x + 0.5 * h, c.y + 0.5 * h}})
        in += inside_surface(scenario, p) ? 1 : 0;
      double frac = 0.0;
      if (in == 5) {
        frac = 1.0;
      } else if (in > 0) {
        int sub = 0;
        for (int sy = 0; sy < 4; ++sy)
          for (int sx = 0; sx < 4; ++sx) {
            const Vec2 p{c.x + (sx - 1.5) * h / 4.0, c.y + (sy - 1.5) * h / 4.0};
            sub += inside_surface(scenario, p) ? 1 : 0;
          }
        frac = sub / 16.0;
      }
      if (frac > 0.0) {
        const double e = surf.conf(c);
        g.cells.push_back({c, frac * h * h * e * e});
      }
    }
  }
  return g;
}

BoundaryGrid boundary_grid(const Scenario& scenario, const BoundaryCurve& curve,
                           int n_s, int n_theta) {
  BoundaryGrid g;
  g.curve = &curve;
  g.theta_w = kTwoPi / n_theta;
  g.thetas.resize(n_theta);
  for (int j = 0; j < n_theta; ++j) g.thetas[j] = (j + 0.5) * g.theta_w;
  const double L = curve.total_length();
  const double ds = L / n_s;
  g.nodes.resize(n_s);
  for (int i = 0; i < n_s; ++i) {
    BoundaryNode& n = g.nodes[i];
    n.s = (i + 0.5) * ds;
    n.x = curve.point_at(n.s);
    n.frame = boundary_frame(scenario.surface, curve, n.x);
    n.kappa_e = curve.euclid_curvature(n.x);
    n.weight = scenario.surface.conf(n.x) * ds;
  }
  return g;
}

PestovGrids make_pestov_grids(const Scenario& scenario, int n_cells,
                              int n_theta, int n_bdry) {
  PestovGrids g;
  g.sm = quadrature_grid(scenario, n_cells, n_theta);
  g.se = boundary_grid(scenario, *scenario.outer, n_bdry, n_theta);
  if (scenario.obstacle)
    g.sr = boundary_grid(scenario, *scenario.obstacle, n_bdry, n_theta);
  return g;
}

double sm_inner(const QuadratureGrid& grid, const SMFn& a, const SMFn& b) {
  std::vector<double> vals(grid.cells.size(), 0.0);
  parallel_for(grid.cells.size(), [&](std::size_t i) {
    const GridCell& c = grid.cells[i];
    double acc = 0.0;
    for (double th : grid.thetas) acc += a(c.center, th) * b(c.center, th);
    vals[i] = acc * grid.theta_w * c.weight;
  });
  return pairwise_sum(vals);
}

double boundary_inner(const BoundaryGrid& grid, const SMFn& a, const SMFn& b) {
  return boundary_quad(grid, [&](const BoundaryNode& n, double th) {
    return a(n.x, th) * b(n.x, th);
  });
}

double l2_inner(const PestovGrids& grids, L2Domain domain, const SMFn& a,
                const SMFn& b) {
  switch (domain) {
    case L2Domain::SM:
      return sm_inner(grids.sm, a, b);
    case L2Domain::SE:
      return boundary_inner(grids.se, a, b);
    case L2Domain::SR:
      if (!grids.sr) throw DimensionMismatch("scenario has no obstacle: no SR");
      return boundary_inner(*grids.sr, a, b);
  }
  return 0.0;
}

double residual_eps(const QuadratureGrid& grid) {
  return 1e-14 * static_cast<double>(grid.cell_count());
}

PestovInteriorReport pestov_interior_identity(const Scenario& scenario,
                                              const PestovGrids& grids,
                                              const CircleBundleFunction& u) {
  const ConformalSurface& surf = scenario.surface;
  const SMFn vx = [&](Vec2 x, double th) { return frame_VX(surf, u, x, th); };
  const SMFn xv = [&](Vec2 x, double th) { return frame_XV(surf, u, x, th); };
  const SMFn xf = [&](Vec2 x, double th) { return frame_X(surf, u, x, th); };
  const SMFn v = [&](Vec2 x, double th) { return frame_V(u, x, th); };
  const SMFn kv = [&](Vec2 x, double th) {
    return surf.gauss_curvature(x) * frame_V(u, x, th);
  };

  PestovInteriorReport r;
  r.lhs = sm_inner(grids.sm, vx, vx);
  r.xv_term = sm_inner(grids.sm, xv, xv);
  r.x_term = sm_inner(grids.sm, xf, xf);
  r.curv_term = sm_inner(grids.sm, kv, v);

  if (u.support() != CircleBundleFunction::Support::Compact) {
    const BoundaryTermIntegrands bt{surf, u};
    const BdryFn f = [&](const BoundaryNode& n, double th) {
      return bt.grad_T(n, th) * frame_V(u, n.x, th);
    };
    r.bdry_term = boundary_quad(grids.se, f);
    if (grids.sr) r.bdry_term += boundary_quad(*grids.sr, f);
  }

  const double rhs = r.xv_term + r.x_term - r.curv_term + r.bdry_term;
  r.residual = rel_residual(r.lhs, rhs, residual_eps(grids.sm));
  return r;
}

BoundaryDecompositionReport boundary_decomposition(
    const Scenario& scenario, const PestovGrids& grids,
    const CircleBundleFunction& u) {
  const ConformalSurface& surf = scenario.surface;
  const BoundaryTermIntegrands bt{surf, u};

  auto accumulate = [&](const BoundaryGrid& grid, double* lhs, double* eo,
                        double* oe, double* kap) {
    *lhs += boundary_quad(grid, [&](const BoundaryNode& n, double th) {
      return bt.grad_T(n, th) * u.dtheta(n.x, th, 1);
    });
    *eo += boundary_quad(grid, [&](const BoundaryNode& n, double th) {
      const double th_r = 2.0 * n.frame.alpha - th;
      const double gTe = 0.5 * (bt.grad_T(n, th) + bt.grad_T_rho(n, th));
      const double vo = 0.5 * (u.dtheta(n.x, th, 1) + u.dtheta(n.x, th_r, 1));
      return gTe * vo;
    });
    *oe += boundary_quad(grid, [&](const BoundaryNode& n, double th) {
      const double th_r = 2.0 * n.frame.alpha - th;
      const double gTo = 0.5 * (bt.grad_T(n, th) - bt.grad_T_rho(n, th));
      const double ve = 0.5 * (u.dtheta(n.x, th, 1) - u.dtheta(n.x, th_r, 1));
      return gTo * ve;
    });
    *kap += boundary_quad(grid, [&](const BoundaryNode& n, double th) {
      return n.frame.kappa * sqr(u.dtheta(n.x, th, 1));
    });
  };

  BoundaryDecompositionReport r;
  accumulate(grids.se, &r.lhs, &r.cross_eo, &r.cross_oe, &r.kappa_term);
  if (grids.sr)
    accumulate(*grids.sr, &r.lhs, &r.cross_eo, &r.cross_oe, &r.kappa_term);
  const double rhs = r.cross_eo + r.cross_oe - r.kappa_term;
  r.residual = rel_residual(r.lhs, rhs, residual_eps(grids.sm));
  return r;
}

PestovFullReport pestov_full_residual(const Scenario& scenario,
                                      const PestovGrids& grids,
                                      const CircleBundleFunction& u) {
  const ConformalSurface& surf = scenario.surface;
  const SMFn vx = [&](Vec2 x, double th) { return frame_VX(surf, u, x, th); };
  const SMFn xv = [&](Vec2 x, double th) { return frame_XV(surf, u, x, th); };
  const SMFn xf = [&](Vec2 x, double th) { return frame_X(surf, u, x, th); };
  const SMFn v = [&](Vec2 x, double th) { return frame_V(u, x, th); };
  const SMFn kv = [&](Vec2 x, double th) {
    return surf.gauss_curvature(x) * frame_V(u, x, th);
  };

  PestovFullReport r;
  r.lhs = sm_inner(grids.sm, vx, vx);
  r.xv_term = sm_inner(grids.sm, xv, xv);
  r.x_term = sm_inner(grids.sm, xf, xf);
  r.curv_term = sm_inner(grids.sm, kv, v);

  const BdryFn kq = [&](const BoundaryNode& n, double th) {
    return n.frame.kappa * sqr(u.dtheta(n.x, th, 1));
  };
  r.kappa_term = boundary_quad(grids.se, kq);
  if (grids.sr) r.kappa_term += boundary_quad(*grids.sr, kq);

  const double rhs = r.xv_term + r.x_term - r.curv_term - r.kappa_term;
  r.residual = rel_residual(r.lhs, rhs, residual_eps(grids.sm));
  return r;
}

CommutatorReport commutator_check(const Scenario& scenario,
                                  const PestovGrids& grids,
                                  const CircleBundleFunction& u) {
  const ConformalSurface& surf = scenario.surface;
  const SMFn vx = [&](Vec2 x, double th) { return frame_VX(surf, u, x, th); };
  const SMFn xv = [&](Vec2 x, double th) { return frame_XV(surf, u, x, th); };
  const SMFn xf = [&](Vec2 x, double th) { return frame_X(surf, u, x, th); };
  const SMFn v = [&](Vec2 x, double th) { return frame_V(u, x, th); };
  const SMFn kv = [&](Vec2 x, double th) {
    return surf.gauss_curvature(x) * frame_V(u, x, th);
  };

  auto v_dot_nu = [](const BoundaryNode& n, double th) {
    return dot(Vec2{std::cos(th), std::sin(th)}, n.frame.nu_e);
  };
  auto bdry_all = [&](const BdryFn& f) {
    double acc = boundary_quad(grids.se, f);
    if (grids.sr) acc += boundary_quad(*grids.sr, f);
    return acc;
  };

  CommutatorReport r;
  const double norm_vx = sm_inner(grids.sm, vx, vx);
  const double norm_xv = sm_inner(grids.sm, xv, xv);
  const double bdry_vvx = bdry_all([&](const BoundaryNode& n, double th) {
    return v_dot_nu(n, th) * frame_VVX(surf, u, n.x, th) * u.value(n.x, th);
  });
  const double bdry_xv = bdry_all([&](const BoundaryNode& n, double th) {
    return v_dot_nu(n, th) * frame_XV(surf, u, n.x, th) * u.dtheta(n.x, th, 1);
  });
  r.lhs = norm_vx - norm_xv + bdry_vvx + bdry_xv;

  const double norm_x = sm_inner(grids.sm, xf, xf);
  const double curv = sm_inner(grids.sm, kv, v);
  const double bdry_x = bdry_all([&](const BoundaryNode& n, double th) {
    return v_dot_nu(n, th) * frame_X(surf, u, n.x, th) * u.value(n.x, th);
  });
  r.rhs = norm_x - curv - bdry_x;
  // Both sides cancel to zero for several registry members, so the residual
  // is scaled by the largest constituent term instead of the sums.
  const double scale =
      std::max({norm_vx, norm_xv, norm_x, std::abs(curv), std::abs(bdry_vvx),
                std::abs(bdry_xv), std::abs(bdry_x), residual_eps(grids.sm)});
  r.residual = std::abs(r.lhs - r.rhs) / scale;
  return r;
}

double stability_ratio(const Scenario& scenario, const ScalarField& f,
                       int n_points, int n_angles) {
  const BoundaryGrid se =
      boundary_grid(scenario, *scenario.outer, n_points, n_angles);

  double kappa0 = 0.0;
  for (const BoundaryNode& n : se.nodes)
    kappa0 = std::max(kappa0, n.frame.kappa);

  // u^f on SE: zero for outward directions, traced otherwise. Failed traces
  // (tangential aborts, capped rays) contribute zero to this diagnostic.
  const std::size_t nn = se.nodes.size(), nt = se.thetas.size();
  std::vector<double> uvals(nn * nt, 0.0);
  parallel_for(nn, [&](std::size_t i) {
    const BoundaryNode& n = se.nodes[i];
    for (std::size_t j = 0; j < nt; ++j) {
      const double th = se.thetas[j];
      const Vec2 omega{std::cos(th), std::sin(th)};
      if (dot(omega, n.frame.nu_e) >= -1e-12) continue;
      try {
        const TransformSample s = brt_forward(scenario, f, n.x, th);
        uvals[i * nt + j] = s.value;
      } catch (const Error&) {
      }
    }
  });

  std::vector<double> contrib(nn * nt, 0.0);
  for (std::size_t i = 0; i < nn; ++i)
    for (std::size_t j = 0; j < nt; ++j) {
      const double up = uvals[i * nt + (j + 1) % nt];
      const double um = uvals[i * nt + (j + nt - 1) % nt];
      const double vu = (up - um) / (2.0 * se.theta_w);
      contrib[i * nt + j] = sqr(vu) * se.nodes[i].weight * se.theta_w;
    }
  const double vnorm = std::sqrt(pairwise_sum(contrib));

  const QuadratureGrid mg = quadrature_grid(scenario, 128, 1);
  std::vector<double> fv(mg.cells.size(), 0.0);
  for (std::size_t i = 0; i < mg.cells.size(); ++i)
    fv[i] = sqr(f.value(mg.cells[i].center)) * mg.cells[i].weight;
  const double fnorm = std::sqrt(pairwise_sum(fv));

  if (fnorm == 0.0) return std::numeric_limits<double>::quiet_NaN();
  return (kappa0 / kTwoPi) * vnorm / fnorm;
}

Vec2 vertical_gradient(const ConformalSurface& s, const CircleBundleFunction& u,
                       Vec2 x, double theta) {
  const double vu = u.dtheta(x, theta, 1);
  const Vec2 omega_perp{-std::sin(theta), std::cos(theta)};
  return (vu / s.conf(x)) * omega_perp;
}

}  // namespace brl
