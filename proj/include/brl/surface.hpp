#pragma once

#include "brl/common.hpp"
#include "brl/curves.hpp"
#include "brl/profiles.hpp"

namespace brl {

// Christoffel symbols G[l][j][k], symmetric in (j,k).
struct Christoffel {
  double G[2][2][2] = {};
};

// Surface M with metric g_{jk} = e^{2*lambda} delta_{jk} in isothermal
// coordinates. All geometry is derived analytically from the lambda profile.
class ConformalSurface {
 public:
  explicit ConformalSurface(ProfilePtr lam) : lam_(std::move(lam)) {}

  double lambda(Vec2 x) const { return lam_->value(x); }
  Vec2 grad_lambda(Vec2 x) const { return lam_->gradient(x); }
  Mat2 hess_lambda(Vec2 x) const { return lam_->hessian(x); }
  const ScalarProfile& lambda_profile() const { return *lam_; }
  ProfilePtr lambda_shared() const { return lam_; }

  double conf(Vec2 x) const { return std::exp(lambda(x)); }

  double metric_dot(Vec2 x, Vec2 u, Vec2 w) const {
    const double e = conf(x);
    return e * e * dot(u, w);
  }
  double metric_norm(Vec2 x, Vec2 u) const {
    return conf(x) * norm(u);
  }
  Vec2 g_normalize(Vec2 x, Vec2 u) const {
    return u / metric_norm(x, u);
  }

  // Gamma^l_{jk} = dl_j delta^l_k + dl_k delta^l_j - dl_l delta_{jk}.
  Christoffel christoffel(Vec2 x) const {
    const Vec2 dl = grad_lambda(x);
    const double d[2] = {dl.x, dl.y};
    Christoffel c;
    for (int l = 0; l < 2; ++l)
      for (int j = 0; j < 2; ++j)
        for (int k = 0; k < 2; ++k)
          c.G[l][j][k] = d[j] * (l == k) + d[k] * (l == j) - d[l] * (j == k);
    return c;
  }

  // Gamma(u,w)^l = Gamma^l_{jk} u^j w^k, in closed form.
  Vec2 christoffel_apply(Vec2 x, Vec2 u, Vec2 w) const {
    const Vec2 dl = grad_lambda(x);
    return dot(dl, u) * w + dot(dl, w) * u - dot(u, w) * dl;
  }

  // K = -e^{-2 lambda} (d11 + d22) lambda.
  double gauss_curvature(Vec2 x) const {
    const Mat2 h = hess_lambda(x);
    const double e = conf(x);
    return -(h.a11 + h.a22) / (e * e);
  }

  // Unit vector of the circle bundle: v(x, theta) = e^{-lambda} omega_theta.
  Vec2 direction(Vec2 x, double theta) const {
    const double s = 1.0 / conf(x);
    return {s * std::cos(theta), s * std::sin(theta)};
  }

  // Fiber angle of a (nonzero) tangent vector.
  static double angle_of(Vec2 v) { return wrap_angle(std::atan2(v.y, v.x)); }

 private:
  ProfilePtr lam_;
};

// g-orthonormal boundary frame at x on the curve: nu is the g-unit outward
// normal (out of M on both E and R), T = nu rotated by +90 degrees in g.
// alpha is the fiber angle of T, used by the boundary reflection
// (x, theta) -> (x, 2*alpha - theta). kappa is the signed curvature in g.
struct BoundaryFrame {
  Vec2 nu, T;      // g-unit
  Vec2 nu_e, T_e;  // Euclidean unit
  double alpha = 0.0;
  double kappa = 0.0;
};

BoundaryFrame boundary_frame(const ConformalSurface& surface,
                             const BoundaryCurve& curve, Vec2 x,
                             double tol = 1e-7);

double signed_curvature(const ConformalSurface& surface,
                        const BoundaryCurve& curve, Vec2 x,
                        double tol = 1e-7);

}  // namespace brl
