#include "brl/surface.hpp"

#include "brl/errors.hpp"

namespace brl {

namespace {
void require_on_curve(const BoundaryCurve& curve, Vec2 x, double tol) {
  const double d = std::abs(curve.event_value(x));
  if (d > tol) {
    throw PointNotOnBoundary("point (" + fmt17(x.x) + "," + fmt17(x.y) +
                             ") is off the boundary by " + fmt17(d));
  }
}
}  // namespace

BoundaryFrame boundary_frame(const ConformalSurface& surface,
                             const BoundaryCurve& curve, Vec2 x, double tol) {
  require_on_curve(curve, x, tol);
  BoundaryFrame f;
  f.nu_e = curve.normal_euclid(x);
  f.T_e = rot90(f.nu_e);
  const double s = 1.0 / surface.conf(x);
  f.nu = s * f.nu_e;
  f.T = s * f.T_e;
  f.alpha = ConformalSurface::angle_of(f.T_e);
  f.kappa = signed_curvature(surface, curve, x, tol);
  return f;
}

double signed_curvature(const ConformalSurface& surface,
                        const BoundaryCurve& curve, Vec2 x, double tol) {
  require_on_curve(curve, x, tol);
  // kappa = alpha_dot - eta(gamma_dot) with eta = d2(lambda) dx1 - d1(lambda) dx2
  // evaluated on the g-unit tangent; alpha_dot = e^{-lambda} * kappa_euclid.
  const Vec2 nu_e = curve.normal_euclid(x);
  const Vec2 t_e = rot90(nu_e);
  const Vec2 dl = surface.grad_lambda(x);
  const double eta_t = dl.y * t_e.x - dl.x * t_e.y;
  return (curve.euclid_curvature(x) - eta_t) / surface.conf(x);
}

}  // namespace brl
