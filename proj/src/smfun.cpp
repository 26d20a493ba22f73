#include "brl/smfun.hpp"

#include <cmath>
#include <utility>
#include <vector>

#include "brl/errors.hpp"
#include "brl/profiles.hpp"

namespace brl {

namespace {

// Sum of terms a_k(x) trig(k theta); d^b/dtheta^b rotates each term by
// b quarter periods and scales by k^b.
struct FourierTerm {
  int k = 0;
  bool is_sin = false;
  ProfilePtr amp;
};

double trig_deriv(int k, bool is_sin, double theta, int b) {
  const double arg = k * theta + (is_sin ? -0.5 * kPi : 0.0) + b * 0.5 * kPi;
  double f = 1.0;
  for (int i = 0; i < b; ++i) f *= k;
  return f * std::cos(arg);
}

class FourierFunction final : public CircleBundleFunction {
 public:
  FourierFunction(std::vector<FourierTerm> terms, Support tag, std::string name)
      : terms_(std::move(terms)), tag_(tag), name_(std::move(name)) {}

  double dtheta(Vec2 x, double theta, int b) const override {
    double acc = 0.0;
    for (const auto& t : terms_)
      acc += t.amp->value(x) * trig_deriv(t.k, t.is_sin, theta, b);
    return acc;
  }
  Vec2 grad_x(Vec2 x, double theta, int b) const override {
    Vec2 acc{0.0, 0.0};
    for (const auto& t : terms_)
      acc += trig_deriv(t.k, t.is_sin, theta, b) * t.amp->gradient(x);
    return acc;
  }
  Mat2 hess_x(Vec2 x, double theta, int b) const override {
    Mat2 acc;
    for (const auto& t : terms_)
      acc = acc + trig_deriv(t.k, t.is_sin, theta, b) * t.amp->hessian(x);
    return acc;
  }
  Support support() const override { return tag_; }
  std::string describe() const override { return name_; }

 private:
  std::vector<FourierTerm> terms_;
  Support tag_;
  std::string name_;
};

// One minus the quintic smoothstep on [r0, r1]: C^2, identically 1 below r0
// and identically 0 above r1.
struct RadialWindow {
  double r0, r1;

  double t_of(double r) const { return (r - r0) / (r1 - r0); }
  double value(double r) const {
    if (r <= r0) return 1.0;
    if (r >= r1) return 0.0;
    const double t = t_of(r);
    return 1.0 - t * t * t * (10.0 + t * (-15.0 + 6.0 * t));
  }
  double d1(double r) const {
    if (r <= r0 || r >= r1) return 0.0;
    const double t = t_of(r);
    return -30.0 * t * t * (1.0 - t) * (1.0 - t) / (r1 - r0);
  }
  double d2(double r) const {
    if (r <= r0 || r >= r1) return 0.0;
    const double t = t_of(r);
    return -60.0 * t * (1.0 - t) * (1.0 - 2.0 * t) / ((r1 - r0) * (r1 - r0));
  }
};

// u = w(|x|) cos(k(theta - phi(x) - pi/2)) with phi the polar angle. Under
// the boundary reflection on a circle centered at the origin the fiber map
// is theta -> 2 phi - pi - theta, which shifts the phase by a full period:
// the function is reflection-even on every centered circle.
class RingEvenFunction final : public CircleBundleFunction {
 public:
  RingEvenFunction(int k, double r0, double r1) : k_(k), win_{r0, r1} {}

  double dtheta(Vec2 x, double theta, int b) const override {
    return win_.value(norm(x)) * C(x, theta, b);
  }
  Vec2 grad_x(Vec2 x, double theta, int b) const override {
    const double r = norm(x);
    const Vec2 rhat = x / r;
    const Vec2 gphi = rot90(x) / (r * r);
    return win_.d1(r) * C(x, theta, b) * rhat +
           win_.value(r) * double(k_) * S(x, theta, b) * gphi;
  }
  Mat2 hess_x(Vec2 x, double theta, int b) const override {
    const double r = norm(x);
    const Vec2 rhat = x / r;
    const Vec2 gphi = rot90(x) / (r * r);
    const double w = win_.value(r), w1 = win_.d1(r), w2 = win_.d2(r);
    const double c = C(x, theta, b), s = S(x, theta, b);
    const double k = k_;
    // Hess(phi) = [[2xy, y^2-x^2], [y^2-x^2, -2xy]] / r^4.
    const double r4 = r * r * r * r;
    const Mat2 hphi{2.0 * x.x * x.y / r4, (x.y * x.y - x.x * x.x) / r4,
                    (x.y * x.y - x.x * x.x) / r4, -2.0 * x.x * x.y / r4};
    auto outer = [](Vec2 a, Vec2 b2) {
      return Mat2{a.x * b2.x, a.x * b2.y, a.y * b2.x, a.y * b2.y};
    };
    const Mat2 rr = outer(rhat, rhat);
    const Mat2 tang{(1.0 - rhat.x * rhat.x) / r, -rhat.x * rhat.y / r,
                    -rhat.x * rhat.y / r, (1.0 - rhat.y * rhat.y) / r};
    return w2 * c * rr + w1 * c * tang +
           w1 * k * s * (outer(rhat, gphi) + outer(gphi, rhat)) +
           (-w * k * k * c) * outer(gphi, gphi) + w * k * s * hphi;
  }
  Support support() const override { return Support::ReflectionEven; }
  std::string describe() const override {
    return "ring_even{k=" + std::to_string(k_) + ",r0=" + fmt17(win_.r0) +
           ",r1=" + fmt17(win_.r1) + "}";
  }

 private:
  // C = d^b/dtheta^b cos(k xi), S = d^b (sin(k xi))/... consistent pair with
  // dC/dx = k S dphi/dx (xi = theta - phi - pi/2 decreases with phi).
  double C(Vec2 x, double theta, int b) const {
    const double xi = theta - std::atan2(x.y, x.x) - 0.5 * kPi;
    double f = 1.0;
    for (int i = 0; i < b; ++i) f *= k_;
    return f * std::cos(k_ * xi + b * 0.5 * kPi);
  }
  double S(Vec2 x, double theta, int b) const {
    const double xi = theta - std::atan2(x.y, x.x) - 0.5 * kPi;
    double f = 1.0;
    for (int i = 0; i < b; ++i) f *= k_;
    return f * std::sin(k_ * xi + b * 0.5 * kPi);
  }

  int k_;
  RadialWindow win_;
};

}  // namespace

SMFunctionPtr make_circle_function(const std::string& name,
                                   const std::map<std::string, double>& p) {
  using S = CircleBundleFunction::Support;
  auto coeff = [](double c10, double c01) {
    return make_profile("polynomial", {{"c10", c10}, {"c01", c01}});
  };
  if (name == "zero")
    return std::make_shared<FourierFunction>(std::vector<FourierTerm>{},
                                             S::Compact, "zero");
  if (name == "const") {
    double c = p.count("c") ? p.at("c") : 1.0;
    return std::make_shared<FourierFunction>(
        std::vector<FourierTerm>{
            {0, false, make_profile("constant", {{"c", c}})}},
        S::General, "const{c=" + fmt17(c) + "}");
  }
  if (name == "x1_sin")
    return std::make_shared<FourierFunction>(
        std::vector<FourierTerm>{{1, true, coeff(1.0, 0.0)}}, S::General,
        "x1_sin");
  if (name == "x2_cos")
    return std::make_shared<FourierFunction>(
        std::vector<FourierTerm>{{1, false, coeff(0.0, 1.0)}}, S::General,
        "x2_cos");
  if (name == "sincos")
    return std::make_shared<FourierFunction>(
        std::vector<FourierTerm>{{1, true, coeff(1.0, 0.0)},
                                 {1, false, coeff(0.0, 1.0)}},
        S::General, "sincos");
  if (name == "bump_sin" || name == "bump_cos2") {
    auto prof = make_profile("bump", p);
    const bool is_sin = name == "bump_sin";
    return std::make_shared<FourierFunction>(
        std::vector<FourierTerm>{{is_sin ? 1 : 2, is_sin, prof}}, S::Compact,
        name + "[" + prof->describe() + "]");
  }
  if (name == "gauss_cos2") {
    auto prof = make_profile("gaussian", p);
    return std::make_shared<FourierFunction>(
        std::vector<FourierTerm>{{2, false, prof}}, S::General,
        name + "[" + prof->describe() + "]");
  }
  if (name == "ring_even") {
    const int k = p.count("k") ? static_cast<int>(p.at("k")) : 2;
    const double r0 = p.count("r0") ? p.at("r0") : 0.45;
    const double r1 = p.count("r1") ? p.at("r1") : 0.85;
    if (k < 1 || k > 4)
      throw SchemaError("ring_even frequency k must be in 1..4");
    if (!(0.0 < r0 && r0 < r1))
      throw SchemaError("ring_even window needs 0 < r0 < r1");
    return std::make_shared<RingEvenFunction>(k, r0, r1);
  }
  throw SchemaError("unknown circle bundle function '" + name + "'");
}

SMFunctionPtr parse_circle_function(const std::string& text) {
  const auto [name, params] = parse_spec_string(text);
  return make_circle_function(name, params);
}

double frame_X(const ConformalSurface& s, const CircleBundleFunction& u,
               Vec2 x, double theta) {
  const double c = std::cos(theta), sn = std::sin(theta);
  const Vec2 dl = s.grad_lambda(x);
  const Vec2 g = u.grad_x(x, theta, 0);
  return (c * g.x + sn * g.y + (-dl.x * sn + dl.y * c) * u.dtheta(x, theta, 1)) /
         s.conf(x);
}

double frame_Xperp(const ConformalSurface& s, const CircleBundleFunction& u,
                   Vec2 x, double theta) {
  const double c = std::cos(theta), sn = std::sin(theta);
  const Vec2 dl = s.grad_lambda(x);
  const Vec2 g = u.grad_x(x, theta, 0);
  return (sn * g.x - c * g.y + (dl.x * c + dl.y * sn) * u.dtheta(x, theta, 1)) /
         s.conf(x);
}

double frame_V(const CircleBundleFunction& u, Vec2 x, double theta, int b) {
  return u.dtheta(x, theta, b);
}

FrameDerivatives frame_apply(const ConformalSurface& s,
                             const CircleBundleFunction& u, Vec2 x,
                             double theta) {
  return {frame_X(s, u, x, theta), frame_Xperp(s, u, x, theta),
          frame_V(u, x, theta)};
}

double frame_VX(const ConformalSurface& s, const CircleBundleFunction& u,
                Vec2 x, double theta) {
  const double c = std::cos(theta), sn = std::sin(theta);
  const Vec2 dl = s.grad_lambda(x);
  const Vec2 g0 = u.grad_x(x, theta, 0);
  const Vec2 g1 = u.grad_x(x, theta, 1);
  const double u1 = u.dtheta(x, theta, 1), u2 = u.dtheta(x, theta, 2);
  return (-sn * g0.x + c * g0.y + c * g1.x + sn * g1.y -
          (dl.x * c + dl.y * sn) * u1 + (-dl.x * sn + dl.y * c) * u2) /
         s.conf(x);
}

double frame_XV(const ConformalSurface& s, const CircleBundleFunction& u,
                Vec2 x, double theta) {
  const double c = std::cos(theta), sn = std::sin(theta);
  const Vec2 dl = s.grad_lambda(x);
  const Vec2 g1 = u.grad_x(x, theta, 1);
  return (c * g1.x + sn * g1.y +
          (-dl.x * sn + dl.y * c) * u.dtheta(x, theta, 2)) /
         s.conf(x);
}

double frame_VVX(const ConformalSurface& s, const CircleBundleFunction& u,
                 Vec2 x, double theta) {
  const double c = std::cos(theta), sn = std::sin(theta);
  const Vec2 dl = s.grad_lambda(x);
  const Vec2 g0 = u.grad_x(x, theta, 0);
  const Vec2 g1 = u.grad_x(x, theta, 1);
  const Vec2 g2 = u.grad_x(x, theta, 2);
  const double u1 = u.dtheta(x, theta, 1), u2 = u.dtheta(x, theta, 2),
               u3 = u.dtheta(x, theta, 3);
  return (-c * g0.x - sn * g0.y - 2.0 * sn * g1.x + 2.0 * c * g1.y + c * g2.x +
          sn * g2.y + (dl.x * sn - dl.y * c) * u1 -
          2.0 * (dl.x * c + dl.y * sn) * u2 + (-dl.x * sn + dl.y * c) * u3) /
         s.conf(x);
}

double grad_along(const ConformalSurface& s, const CircleBundleFunction& u,
                  Vec2 x, double theta, Vec2 w_hat) {
  const Vec2 dl = s.grad_lambda(x);
  const Vec2 g = u.grad_x(x, theta, 0);
  return (dot(w_hat, g) + cross(w_hat, dl) * u.dtheta(x, theta, 1)) / s.conf(x);
}

}  // namespace brl
