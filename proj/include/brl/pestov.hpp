#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "brl/smfun.hpp"
#include "brl/transform.hpp"

namespace brl {

// Interior quadrature cell; weight = covered Euclidean area times e^{2 lambda}
// at the center, so summing weight * 2 pi gives the SM volume.
struct GridCell {
  Vec2 center;
  double weight = 0.0;
};

struct QuadratureGrid {
  int n_cells = 0;  // per spatial axis
  int n_theta = 0;
  std::vector<GridCell> cells;  // active (at least partially inside M) cells
  std::vector<double> thetas;   // uniform midpoints on [0, 2 pi)
  double theta_w = 0.0;
  std::size_t cell_count() const { return cells.size() * thetas.size(); }
};

// Boundary quadrature node; weight = e^{lambda} ds so that summing
// weight * theta_w integrates over S(E) or S(R) with the g-arclength measure.
struct BoundaryNode {
  double s = 0.0;
  Vec2 x;
  BoundaryFrame frame;
  double kappa_e = 0.0;  // Euclidean curvature, used by the reflection map
  double weight = 0.0;
};

struct BoundaryGrid {
  const BoundaryCurve* curve = nullptr;
  std::vector<BoundaryNode> nodes;
  std::vector<double> thetas;
  double theta_w = 0.0;
};

struct PestovGrids {
  QuadratureGrid sm;
  BoundaryGrid se;
  std::optional<BoundaryGrid> sr;
};

QuadratureGrid quadrature_grid(const Scenario& scenario, int n_cells,
                               int n_theta);
BoundaryGrid boundary_grid(const Scenario& scenario, const BoundaryCurve& curve,
                           int n_s, int n_theta);
PestovGrids make_pestov_grids(const Scenario& scenario, int n_cells,
                              int n_theta, int n_bdry);

using SMFn = std::function<double(Vec2, double)>;

double sm_inner(const QuadratureGrid& grid, const SMFn& a, const SMFn& b);
double boundary_inner(const BoundaryGrid& grid, const SMFn& a, const SMFn& b);

enum class L2Domain { SM, SE, SR };
double l2_inner(const PestovGrids& grids, L2Domain domain, const SMFn& a,
                const SMFn& b);

// Relative-residual denominators use eps = 1e-14 * (cell count).
double residual_eps(const QuadratureGrid& grid);

// ||VXu||^2 = ||XVu||^2 + ||Xu||^2 - (K Vu, Vu) + (grad_T u, Vu)_{dSM}.
// The boundary term is dropped for compactly supported u.
struct PestovInteriorReport {
  double lhs = 0.0;        // ||VXu||^2
  double xv_term = 0.0;    // ||XVu||^2
  double x_term = 0.0;     // ||Xu||^2
  double curv_term = 0.0;  // (K Vu, Vu)
  double bdry_term = 0.0;  // (grad_T u, Vu)_{dSM}
  double residual = 0.0;
};
PestovInteriorReport pestov_interior_identity(const Scenario& scenario,
                                              const PestovGrids& grids,
                                              const CircleBundleFunction& u);

// (grad_T u, Vu)_{dSM} = (grad_T u_e, Vu_o) + (grad_T u_o, Vu_e)
//                        - (kappa Vu, Vu)_{dSM}
// with u_e, u_o the even and odd parts under theta -> 2 alpha - theta.
struct BoundaryDecompositionReport {
  double lhs = 0.0;
  double cross_eo = 0.0;
  double cross_oe = 0.0;
  double kappa_term = 0.0;
  double residual = 0.0;
};
BoundaryDecompositionReport boundary_decomposition(const Scenario& scenario,
                                                   const PestovGrids& grids,
                                                   const CircleBundleFunction& u);

// ||VXu||^2 = ||XVu||^2 + ||Xu||^2 - (K Vu, Vu) - (kappa Vu, Vu)_{dSM}
// for u vanishing on SE and reflection-even on SR.
struct PestovFullReport {
  double lhs = 0.0;
  double xv_term = 0.0;
  double x_term = 0.0;
  double curv_term = 0.0;
  double kappa_term = 0.0;
  double residual = 0.0;
};
PestovFullReport pestov_full_residual(const Scenario& scenario,
                                      const PestovGrids& grids,
                                      const CircleBundleFunction& u);

// Commutator identity ([P*,P]u, u) = ||Xu||^2 - (K Vu, Vu) - (<v,nu> Xu, u)_d
// with the left side reduced by integration by parts to
// ||VXu||^2 - ||XVu||^2 + (<v,nu> VVXu, u)_d + (<v,nu> XVu, Vu)_d.
struct CommutatorReport {
  double lhs = 0.0;
  double rhs = 0.0;
  double residual = 0.0;
};
CommutatorReport commutator_check(const Scenario& scenario,
                                  const PestovGrids& grids,
                                  const CircleBundleFunction& u);

// (kappa_0 / 2 pi) ||V u^f||_{L2(SE)} / ||f||_{L2(M)} with kappa_0 = max
// curvature of E; V u^f by centered theta differences of the traced
// transform on an SE grid. NaN when f vanishes. Report-only diagnostic.
double stability_ratio(const Scenario& scenario, const ScalarField& f,
                       int n_points, int n_angles);

// Vertical gradient as a tangent vector: (Vu) e^{-lambda} omega_perp. Its
// g-inner product with v(x, theta) vanishes identically.
Vec2 vertical_gradient(const ConformalSurface& s, const CircleBundleFunction& u,
                       Vec2 x, double theta);

}  // namespace brl
