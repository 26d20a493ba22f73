#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "brl/raytrace.hpp"
#include "brl/scenario.hpp"
#include "brl/transform.hpp"

namespace brl {

// Piecewise-constant pixel basis on the bounding square [-R, R]^2 of the
// outer curve.  A cell is active iff its center lies in M (inside the outer
// curve, outside the obstacle).  Quadrature points that land in an inactive
// cell are snapped to the nearest active cell so the row sums of the forward
// matrix reproduce travel times exactly: A * 1 == tau.
struct PixelBasis {
  int n = 0;          // cells per side
  double h = 0.0;     // cell width
  Vec2 lo{0.0, 0.0};  // lower-left corner of the grid
  std::vector<Vec2> centers;    // centers of active cells, scan order
  std::vector<int> cell_index;  // n*n -> active index or -1

  int active_count() const { return static_cast<int>(centers.size()); }
  // Active index of the cell containing x, snapping to the nearest active
  // cell center when the containing cell is inactive.
  int locate(Vec2 x) const;
};

PixelBasis make_pixel_basis(const Scenario& scenario, int n);

// Dense forward operator for the pixel basis: row i integrates a
// piecewise-constant field along fan ray i.  Rays that fail to exit through
// the outer curve are dropped and counted.
struct ForwardOperator {
  Eigen::MatrixXd A;            // kept rays x active cells
  Eigen::VectorXd tau;          // travel time per kept ray
  std::vector<int> ray_ids;     // fan index of each kept row
  int n_excluded = 0;
  std::string scenario_hash;
};

ForwardOperator assemble_forward_matrix(const Scenario& scenario,
                                        const PixelBasis& basis,
                                        const std::vector<FanEntry>& fan);

struct SpectrumReport {
  Eigen::VectorXd singular_values;  // descending
  double sigma_max = 0.0;
  double sigma_min = 0.0;
  int effective_rank = 0;  // values above sigma_max * rank_tol
  double rank_tol = 1e-12;
};

SpectrumReport singular_spectrum(const Eigen::MatrixXd& A,
                                 double rank_tol = 1e-12);

// Tikhonov-regularized least squares through the SVD:
//   x = V diag(sigma / (sigma^2 + mu)) U^T d.
// mu == 0 requests the plain pseudoinverse and throws SingularSystem when the
// spectrum is numerically rank deficient.
struct ReconstructionReport {
  Eigen::VectorXd coefficients;
  double mu = 0.0;
  double sigma_max = 0.0;
  double sigma_min = 0.0;
  // Relative L2 coefficient error against the supplied ground truth.
  std::optional<double> rel_error;
};

ReconstructionReport reconstruct(const Eigen::MatrixXd& A,
                                 const Eigen::VectorXd& data, double mu,
                                 const Eigen::VectorXd* truth = nullptr);

// Scale-aware default regularization weight.
double default_mu(const SpectrumReport& spectrum);

// Field values at the active cell centers.
Eigen::VectorXd discretize_field(const PixelBasis& basis,
                                 const ScalarField& field);

// Axial sine supported on an open rectangular band: one full period along x
// over [cx - length/2, cx + length/2], masked to |y - cy| < half_width.  The
// band integrates to zero along every straight crossing of its full axial
// extent.
FieldPtr make_axial_sine_field(Vec2 center, double length, double half_width);

// The invisible field of a two-bar tube scenario: an axial sine spanning the
// straight tube walls, inset three corner radii from each bar end so that
// corner-scattered rays cannot meet the support.  Throws NotATubeScenario
// unless the obstacle has kind "two_bar_tube".
FieldPtr tube_null_function(const Scenario& scenario);

// sqrt of the metric area integral of f^2 over M, midpoint rule on an
// n x n pixel grid.
double field_l2_norm(const Scenario& scenario, const ScalarField& field,
                     int n = 256);

}  // namespace brl
