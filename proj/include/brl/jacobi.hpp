#pragma once

#include <utility>
#include <vector>

#include "brl/raytrace.hpp"

namespace brl {

// Reflection-jump linear algebra at a boundary point x with incoming
// direction zeta. All maps act on Cartesian components of tangent vectors;
// inner products are taken in g.
struct JumpMaps {
  Vec2 x;
  Vec2 nu, T;      // g-unit frame
  double kappa = 0.0;
  Vec2 zeta;       // incoming g-unit direction
  Mat2 rho;        // v -> v - 2<v,nu> nu
  Mat2 phi;        // v -> v - (<v,nu>/<zeta,nu>) zeta
  Mat2 Phi;        // v -> 2(<s(phi v), zeta> nu + <nu, zeta> s(phi v))
};

// phi_zeta xi = xi - (<xi,nu>/<zeta,nu>) zeta; requires non-tangential zeta.
Vec2 phi_project(const ConformalSurface& surface, Vec2 x, Vec2 zeta, Vec2 xi,
                 Vec2 nu, double abort_tol = 1e-4);

// Phi_zeta xi = 2(<s(phi_zeta xi), zeta> nu + <nu,zeta> s(phi_zeta xi)) with
// s the analytic shape operator of the curve in g, s(w) = kappa w on the
// tangent line.
Vec2 Phi_map(const Scenario& scenario, const BoundaryCurve& curve, Vec2 x,
             Vec2 zeta, Vec2 xi);

JumpMaps make_jump_maps(const Scenario& scenario, const BoundaryCurve& curve,
                        Vec2 x, Vec2 zeta);

// Forward jump at a reflection: J+ = rho J-, DJ+ = rho DJ- - Phi_{zeta-} J-.
std::pair<Vec2, Vec2> reflect_jacobi(const JumpMaps& maps, Vec2 J_minus,
                                     Vec2 DJ_minus);

// Inverse form using the outgoing direction: J- = rho J+,
// DJ- = rho DJ+ - Phi_{zeta+} J+.
std::pair<Vec2, Vec2> reflect_jacobi_backward(const Scenario& scenario,
                                              const BoundaryCurve& curve,
                                              Vec2 x, Vec2 zeta_out,
                                              Vec2 J_plus, Vec2 DJ_plus);

struct JacobiSample {
  double t = 0.0;
  int seg_id = 0;
  Vec2 J, DJ;  // DJ is the covariant derivative D_t J
};

struct JumpRecord {
  double t = 0.0;
  Vec2 x;
  Vec2 J_minus, DJ_minus, J_plus, DJ_plus;
};

struct JacobiFrame {
  std::vector<JacobiSample> samples;  // aligned with the ray's samples
  std::vector<JumpRecord> jumps;
};

// Integrates D_t^2 J = -K (J - <J, gamma_dot> gamma_dot) along each segment
// (as a first-order Cartesian system) and applies the reflection jumps.
JacobiFrame propagate_jacobi(const Scenario& scenario, const BrokenRay& ray,
                             Vec2 J0, Vec2 DJ0);

// Covariant initial data of the variation x_s = x0 + s dx, theta_s =
// theta0 + s dtheta: J(0) = dx, DJ(0) = d/ds[v(x_s, theta_s)] + Gamma(dx, v).
std::pair<Vec2, Vec2> variation_initial_data(const ConformalSurface& surface,
                                             Vec2 x0, double theta0, Vec2 dx,
                                             double dtheta);

// State of the broken ray at an arbitrary time, reconstructed from the
// stored dense samples with one partial integrator step.
SMState ray_state_at(const Scenario& scenario, const BrokenRay& ray, double t);

struct FdCheckResult {
  std::vector<double> s_values;
  std::vector<double> errors;  // max over probe times of |FD - J|
  double order = 0.0;          // least-squares slope of log err vs log s
};

// Central-difference oracle for propagate_jacobi under the initial-condition
// variation (dx, dtheta).
FdCheckResult fd_variation_check(const Scenario& scenario, Vec2 x0,
                                 double theta0, Vec2 dx, double dtheta,
                                 const std::vector<double>& s_values);

struct GrowthEnvelope {
  double A = 1.0;
  double B = 0.0;
  int violations = 0;
  double gronwall_C = 0.0;      // 2*max(1, sup|K|) curvature estimate
  int gronwall_violations = 0;  // segment-bound breaches against gronwall_C
};

// Fits the smallest envelope A e^{Bt} >= Z(t)^2/Z(0)^2 with Z^2 = |J|_g^2 +
// |DJ|_g^2 over the frame's samples and counts violations (zero by
// construction of the fit; reported for the record).
GrowthEnvelope growth_envelope(const Scenario& scenario, const BrokenRay& ray,
                               const JacobiFrame& frame);

// Fitted scaling exponent of |Phi_zeta J| versus incidence <zeta,nu> for a
// fixed J with nonzero normal component; the jump law gives -1.
double blowup_scaling_exponent(const Scenario& scenario,
                               const BoundaryCurve& curve, Vec2 x, Vec2 J,
                               const std::vector<double>& incidences);

}  // namespace brl
