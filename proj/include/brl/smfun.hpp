#pragma once

#include <memory>
#include <string>

#include "brl/surface.hpp"

namespace brl {

// Scalar function u(x, theta) on the circle bundle, analytic in both
// arguments. Registry members are finite Fourier sums in theta with smooth
// x-coefficients, so theta-derivatives of any order b are exact.
class CircleBundleFunction {
 public:
  enum class Support {
    Compact,         // vanishes near all of the boundary
    General,         // no support restriction
    ReflectionEven,  // u = u o rho on SR and u = 0 on SE
  };

  virtual ~CircleBundleFunction() = default;

  // d^b/dtheta^b of u and of its spatial derivatives.
  virtual double dtheta(Vec2 x, double theta, int b) const = 0;
  virtual Vec2 grad_x(Vec2 x, double theta, int b) const = 0;
  virtual Mat2 hess_x(Vec2 x, double theta, int b) const = 0;

  virtual Support support() const = 0;
  virtual std::string describe() const = 0;

  double value(Vec2 x, double theta) const { return dtheta(x, theta, 0); }
};

using SMFunctionPtr = std::shared_ptr<const CircleBundleFunction>;

// Registry names accepted by make_circle_function:
//   zero, const{c}
//   x1_sin            u = x1 sin(theta)
//   x2_cos            u = x2 cos(theta)
//   sincos            u = x1 sin(theta) + x2 cos(theta)
//   bump_sin{a,x0,y0,r}       bump(x) sin(theta), compact support
//   bump_cos2{a,x0,y0,r}      bump(x) cos(2 theta), compact support
//   gauss_cos2{a,x0,y0,w}     gaussian(x) cos(2 theta)
//   ring_even{k,r0,r1}        w(|x|) cos(k(theta - phi(x) - pi/2)):
//     radial window w = 1 for r <= r0, quintic decay to 0 at r1; even under
//     the reflection theta -> 2 alpha - theta on every circle centered at
//     the origin, hence reflection-even on a centered circular obstacle,
//     and zero on SE when r1 is at most the outer radius.
SMFunctionPtr make_circle_function(const std::string& name,
                                   const std::map<std::string, double>& params);
SMFunctionPtr parse_circle_function(const std::string& text);

// Frame derivatives at (x, theta); theta-order b applies d^b/dtheta^b to u
// BEFORE the frame operator (b = 0 is the plain operator).
//   Xu  = e^{-lambda}(cos ∂1 + sin ∂2 + (-l1 sin + l2 cos) ∂th) u
//   Xpu = e^{-lambda}(sin ∂1 - cos ∂2 + ( l1 cos + l2 sin) ∂th) u  (= [X,V]u)
//   Vu  = ∂th u
double frame_X(const ConformalSurface& s, const CircleBundleFunction& u,
               Vec2 x, double theta);
double frame_Xperp(const ConformalSurface& s, const CircleBundleFunction& u,
                   Vec2 x, double theta);
double frame_V(const CircleBundleFunction& u, Vec2 x, double theta, int b = 1);

struct FrameDerivatives {
  double Xu = 0.0;
  double Xperp_u = 0.0;
  double Vu = 0.0;
};
FrameDerivatives frame_apply(const ConformalSurface& s,
                             const CircleBundleFunction& u, Vec2 x,
                             double theta);

// Second-level operators for the energy identities.
double frame_VX(const ConformalSurface& s, const CircleBundleFunction& u,
                Vec2 x, double theta);   // V(Xu)
double frame_XV(const ConformalSurface& s, const CircleBundleFunction& u,
                Vec2 x, double theta);   // X(Vu)
double frame_VVX(const ConformalSurface& s, const CircleBundleFunction& u,
                 Vec2 x, double theta);  // V(V(Xu))

// Horizontal derivative along the g-unit vector e^{-lambda} w_hat (w_hat a
// Euclidean unit direction):
//   grad_w u = e^{-lambda}(w_hat . grad_x u + cross(w_hat, grad lambda) ∂th u)
// With w_hat = T_e this is the tangential gradient on the boundary.
double grad_along(const ConformalSurface& s, const CircleBundleFunction& u,
                  Vec2 x, double theta, Vec2 w_hat);

}  // namespace brl
