#include "brl/profiles.hpp"

#include <cmath>
#include <sstream>

#include "brl/errors.hpp"

namespace brl {

namespace {

std::string params_string(const std::map<std::string, double>& p) {
  std::string out;
  for (const auto& [k, v] : p) {
    if (!out.empty()) out += ",";
    out += k + "=" + fmt17(v);
  }
  return out;
}

// Pulls a parameter with a default, tracking which keys were consumed so
// unknown keys can be rejected.
struct ParamReader {
  std::map<std::string, double> params;
  std::map<std::string, double> used;

  double get(const std::string& key, double fallback) {
    auto it = params.find(key);
    double v = it == params.end() ? fallback : it->second;
    used[key] = v;
    if (it != params.end()) params.erase(it);
    return v;
  }
  void finish(const std::string& profile) const {
    if (!params.empty()) {
      throw SchemaError("unknown parameter '" + params.begin()->first +
                        "' for profile '" + profile + "'");
    }
  }
};

class ConstantProfile final : public ScalarProfile {
 public:
  explicit ConstantProfile(double c) : c_(c) {}
  double value(Vec2) const override { return c_; }
  Vec2 gradient(Vec2) const override { return {0.0, 0.0}; }
  Mat2 hessian(Vec2) const override { return {}; }
  std::string describe() const override {
    return c_ == 0.0 ? "zero" : "constant{c=" + fmt17(c_) + "}";
  }

 private:
  double c_;
};

class RadialQuadraticProfile final : public ScalarProfile {
 public:
  RadialQuadraticProfile(double c, Vec2 x0) : c_(c), x0_(x0) {}
  double value(Vec2 x) const override { return c_ * norm2(x - x0_); }
  Vec2 gradient(Vec2 x) const override { return 2.0 * c_ * (x - x0_); }
  Mat2 hessian(Vec2) const override { return {2.0 * c_, 0.0, 0.0, 2.0 * c_}; }
  std::string describe() const override {
    return "radial_quadratic{c=" + fmt17(c_) + ",x0=" + fmt17(x0_.x) +
           ",y0=" + fmt17(x0_.y) + "}";
  }

 private:
  double c_;
  Vec2 x0_;
};

class GaussianProfile final : public ScalarProfile {
 public:
  GaussianProfile(double a, Vec2 x0, double w) : a_(a), x0_(x0), w2_(w * w), w_(w) {}
  double value(Vec2 x) const override {
    return a_ * std::exp(-norm2(x - x0_) / w2_);
  }
  Vec2 gradient(Vec2 x) const override {
    return (-2.0 / w2_) * value(x) * (x - x0_);
  }
  Mat2 hessian(Vec2 x) const override {
    const Vec2 d = x - x0_;
    const double v = value(x);
    const double s = -2.0 / w2_;
    // H = v * (s*I + s^2 * d d^T)
    const double off = v * s * s * d.x * d.y;
    return {v * (s + s * s * d.x * d.x), off, off,
            v * (s + s * s * d.y * d.y)};
  }
  std::string describe() const override {
    return "gaussian{a=" + fmt17(a_) + ",w=" + fmt17(w_) +
           ",x0=" + fmt17(x0_.x) + ",y0=" + fmt17(x0_.y) + "}";
  }

 private:
  double a_;
  Vec2 x0_;
  double w2_, w_;
};

// Standard mollifier bump, identically zero outside the disc of radius r.
class BumpProfile final : public ScalarProfile {
 public:
  BumpProfile(double a, Vec2 x0, double r) : a_(a), x0_(x0), r_(r) {}
  double value(Vec2 x) const override {
    const double t = norm2(x - x0_) / (r_ * r_);
    if (t >= 1.0) return 0.0;
    return a_ * std::exp(1.0 - 1.0 / (1.0 - t));
  }
  Vec2 gradient(Vec2 x) const override {
    const Vec2 d = x - x0_;
    const double r2 = r_ * r_;
    const double t = norm2(d) / r2;
    if (t >= 1.0) return {0.0, 0.0};
    const double one = 1.0 - t;
    const double phi = std::exp(1.0 - 1.0 / one);
    const double dphi = -phi / (one * one);
    return (a_ * dphi * 2.0 / r2) * d;
  }
  Mat2 hessian(Vec2 x) const override {
    const Vec2 d = x - x0_;
    const double r2 = r_ * r_;
    const double t = norm2(d) / r2;
    if (t >= 1.0) return {};
    const double one = 1.0 - t;
    const double phi = std::exp(1.0 - 1.0 / one);
    const double e1 = -1.0 / (one * one);            // dE/dt
    const double e2 = -2.0 / (one * one * one);      // d2E/dt2
    const double dphi = phi * e1;
    const double ddphi = phi * (e2 + e1 * e1);
    const double c1 = a_ * ddphi * 4.0 / (r2 * r2);  // coefficient of d d^T
    const double c2 = a_ * dphi * 2.0 / r2;          // coefficient of I
    const double off = c1 * d.x * d.y;
    return {c1 * d.x * d.x + c2, off, off, c1 * d.y * d.y + c2};
  }
  std::string describe() const override {
    return "bump{a=" + fmt17(a_) + ",r=" + fmt17(r_) + ",x0=" + fmt17(x0_.x) +
           ",y0=" + fmt17(x0_.y) + "}";
  }

 private:
  double a_;
  Vec2 x0_;
  double r_;
};

class PolynomialProfile final : public ScalarProfile {
 public:
  PolynomialProfile(double c00, double c10, double c01, double c20, double c11,
                    double c02)
      : c00_(c00), c10_(c10), c01_(c01), c20_(c20), c11_(c11), c02_(c02) {}
  double value(Vec2 x) const override {
    return c00_ + c10_ * x.x + c01_ * x.y + c20_ * x.x * x.x +
           c11_ * x.x * x.y + c02_ * x.y * x.y;
  }
  Vec2 gradient(Vec2 x) const override {
    return {c10_ + 2.0 * c20_ * x.x + c11_ * x.y,
            c01_ + c11_ * x.x + 2.0 * c02_ * x.y};
  }
  Mat2 hessian(Vec2) const override {
    return {2.0 * c20_, c11_, c11_, 2.0 * c02_};
  }
  std::string describe() const override {
    std::map<std::string, double> p{{"c00", c00_}, {"c10", c10_}, {"c01", c01_},
                                    {"c20", c20_}, {"c11", c11_}, {"c02", c02_}};
    return "polynomial{" + params_string(p) + "}";
  }

 private:
  double c00_, c10_, c01_, c20_, c11_, c02_;
};

}  // namespace

ProfilePtr make_profile(const std::string& name,
                        const std::map<std::string, double>& params) {
  ParamReader r{params, {}};
  if (name == "zero") {
    r.finish(name);
    return std::make_shared<ConstantProfile>(0.0);
  }
  if (name == "constant") {
    double c = r.get("c", 0.0);
    r.finish(name);
    return std::make_shared<ConstantProfile>(c);
  }
  if (name == "radial_quadratic") {
    double c = r.get("c", 0.1);
    Vec2 x0{r.get("x0", 0.0), r.get("y0", 0.0)};
    r.finish(name);
    return std::make_shared<RadialQuadraticProfile>(c, x0);
  }
  if (name == "gaussian") {
    double a = r.get("a", 1.0);
    Vec2 x0{r.get("x0", 0.0), r.get("y0", 0.0)};
    double w = r.get("w", 0.3);
    if (w <= 0.0) throw SchemaError("gaussian width must be positive");
    r.finish(name);
    return std::make_shared<GaussianProfile>(a, x0, w);
  }
  if (name == "bump") {
    double a = r.get("a", 1.0);
    Vec2 x0{r.get("x0", 0.0), r.get("y0", 0.0)};
    double rad = r.get("r", 0.3);
    if (rad <= 0.0) throw SchemaError("bump radius must be positive");
    r.finish(name);
    return std::make_shared<BumpProfile>(a, x0, rad);
  }
  if (name == "polynomial") {
    double c00 = r.get("c00", 0.0), c10 = r.get("c10", 0.0),
           c01 = r.get("c01", 0.0), c20 = r.get("c20", 0.0),
           c11 = r.get("c11", 0.0), c02 = r.get("c02", 0.0);
    r.finish(name);
    return std::make_shared<PolynomialProfile>(c00, c10, c01, c20, c11, c02);
  }
  throw SchemaError("unknown profile name '" + name + "'");
}

std::pair<std::string, std::map<std::string, double>> parse_spec_string(
    const std::string& text) {
  auto brace = text.find('{');
  if (brace == std::string::npos) return {text, {}};
  if (text.back() != '}') throw ParseError("spec '" + text + "': missing '}'");
  const std::string name = text.substr(0, brace);
  const std::string body = text.substr(brace + 1, text.size() - brace - 2);
  std::map<std::string, double> params;
  std::stringstream ss(body);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    auto eq = item.find('=');
    if (eq == std::string::npos)
      throw ParseError("spec parameter '" + item + "': expected k=v");
    const std::string key = item.substr(0, eq);
    try {
      params[key] = std::stod(item.substr(eq + 1));
    } catch (const std::exception&) {
      throw ParseError("spec parameter '" + item + "': bad number");
    }
  }
  return {name, params};
}

ProfilePtr parse_profile(const std::string& text) {
  const auto [name, params] = parse_spec_string(text);
  return make_profile(name, params);
}

ProfilePtr zero_profile() { return make_profile("zero", {}); }

}  // namespace brl
