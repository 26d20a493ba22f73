#include "brl/curves.hpp"

#include <algorithm>
#include <cmath>

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

class Circle final : public BoundaryCurve {
 public:
  Circle(Vec2 c, double r, Role role) : c_(c), r_(r), role_(role) {
    if (r <= 0.0) throw SchemaError("circle radius must be positive");
  }
  Role role() const override { return role_; }
  std::string kind() const override { return "circle"; }
  std::map<std::string, double> params() const override {
    return {{"cx", c_.x}, {"cy", c_.y}, {"r", r_}};
  }
  double event_value(Vec2 x) const override {
    const double d = norm(x - c_) - r_;
    return role_ == Role::Outer ? d : -d;
  }
  Vec2 event_gradient(Vec2 x) const override {
    Vec2 rad = x - c_;
    const double n = norm(rad);
    rad = n < 1e-300 ? Vec2{1.0, 0.0} : rad / n;
    return role_ == Role::Outer ? rad : -rad;
  }
  double euclid_curvature(Vec2) const override {
    return role_ == Role::Outer ? 1.0 / r_ : -1.0 / r_;
  }
  double total_length() const override { return kTwoPi * r_; }
  Vec2 point_at(double s) const override {
    const double phi = role_ == Role::Outer ? s / r_ : -s / r_;
    return c_ + Vec2{r_ * std::cos(phi), r_ * std::sin(phi)};
  }
  double arclength_of(Vec2 x) const override {
    const double phi = wrap_angle(std::atan2(x.y - c_.y, x.x - c_.x));
    return role_ == Role::Outer ? r_ * phi
                                : r_ * wrap_angle(kTwoPi - phi);
  }
  double bound_radius() const override { return norm(c_) + r_; }

 private:
  Vec2 c_;
  double r_;
  Role role_;
};

class Ellipse final : public BoundaryCurve {
 public:
  Ellipse(Vec2 c, double rx, double ry, Role role)
      : c_(c), rx_(rx), ry_(ry), role_(role) {
    if (rx <= 0.0 || ry <= 0.0)
      throw SchemaError("ellipse semi-axes must be positive");
    // Cumulative arclength over the ccw angle parameter, composite Simpson
    // per panel; panels are fine enough that interpolation error is far
    // below event tolerances.
    cum_.resize(kPanels + 1, 0.0);
    for (int i = 0; i < kPanels; ++i) {
      const double a = kTwoPi * i / kPanels;
      const double b = kTwoPi * (i + 1) / kPanels;
      cum_[i + 1] = cum_[i] + simpson_panel(a, b);
    }
  }
  Role role() const override { return role_; }
  std::string kind() const override { return "ellipse"; }
  std::map<std::string, double> params() const override {
    return {{"cx", c_.x}, {"cy", c_.y}, {"rx", rx_}, {"ry", ry_}};
  }
  double event_value(Vec2 x) const override {
    const Vec2 d = x - c_;
    const double f =
        sqr(d.x / rx_) + sqr(d.y / ry_) - 1.0;
    const Vec2 g{2.0 * d.x / (rx_ * rx_), 2.0 * d.y / (ry_ * ry_)};
    const double gn = std::max(norm(g), 1.0 / std::max(rx_, ry_));
    const double v = f / gn;  // first-order distance near the curve
    return role_ == Role::Outer ? v : -v;
  }
  Vec2 event_gradient(Vec2 x) const override {
    const Vec2 d = x - c_;
    Vec2 g{2.0 * d.x / (rx_ * rx_), 2.0 * d.y / (ry_ * ry_)};
    if (norm(g) < 1e-300) g = {1.0, 0.0};
    return role_ == Role::Outer ? g : -g;
  }
  double euclid_curvature(Vec2 x) const override {
    const Vec2 d = x - c_;
    const double sp2 = sqr(rx_ * d.y / ry_) + sqr(ry_ * d.x / rx_);
    const double k = rx_ * ry_ / std::pow(sp2, 1.5);
    return role_ == Role::Outer ? k : -k;
  }
  double total_length() const override { return cum_.back(); }
  Vec2 point_at(double s) const override {
    double u = s;
    u = std::fmod(u, cum_.back());
    if (u < 0.0) u += cum_.back();
    if (role_ == Role::Obstacle) u = cum_.back() - u;
    const double phi = phi_of_ccw_arclength(u);
    return c_ + Vec2{rx_ * std::cos(phi), ry_ * std::sin(phi)};
  }
  double arclength_of(Vec2 x) const override {
    const Vec2 d = x - c_;
    const double phi = wrap_angle(std::atan2(d.y / ry_, d.x / rx_));
    const double u = ccw_arclength_of_phi(phi);
    return role_ == Role::Outer ? u : std::fmod(cum_.back() - u, cum_.back());
  }
  double bound_radius() const override { return norm(c_) + std::max(rx_, ry_); }

 private:
  static constexpr int kPanels = 4096;
  double speed(double phi) const {
    return std::sqrt(sqr(rx_ * std::sin(phi)) + sqr(ry_ * std::cos(phi)));
  }
  double simpson_panel(double a, double b) const {
    return (b - a) / 6.0 * (speed(a) + 4.0 * speed(0.5 * (a + b)) + speed(b));
  }
  double ccw_arclength_of_phi(double phi) const {
    const double h = kTwoPi / kPanels;
    const int i = std::min(static_cast<int>(phi / h), kPanels - 1);
    return cum_[i] + simpson_panel(i * h, phi);
  }
  double phi_of_ccw_arclength(double u) const {
    const auto it = std::upper_bound(cum_.begin(), cum_.end(), u);
    int i = std::max(0, static_cast<int>(it - cum_.begin()) - 1);
    i = std::min(i, kPanels - 1);
    const double h = kTwoPi / kPanels;
    double phi = i * h + (u - cum_[i]) / std::max(speed(i * h), 1e-12);
    // Newton refinement on the panel-local arclength equation.
    for (int it2 = 0; it2 < 3; ++it2) {
      const double r = cum_[i] + simpson_panel(i * h, phi) - u;
      phi -= r / std::max(speed(phi), 1e-12);
    }
    return phi;
  }

  Vec2 c_;
  double rx_, ry_;
  Role role_;
  std::vector<double> cum_;
};

// One rounded rectangle: outer half-extents (hx, hy), corner radius rc.
// Geometry is expressed relative to the bar center.
struct RoundedBox {
  Vec2 center;
  double hx, hy, rc;
  double bx, by;  // corner-circle center offsets

  RoundedBox(Vec2 c, double hx_, double hy_, double rc_)
      : center(c), hx(hx_), hy(hy_), rc(rc_), bx(hx_ - rc_), by(hy_ - rc_) {
    if (rc <= 0.0 || bx <= 0.0 || by <= 0.0)
      throw SchemaError("rounded box: need 0 < corner_radius < half extents");
  }

  // Exact signed distance, positive outside the bar.
  double sd(Vec2 x) const {
    const Vec2 p = x - center;
    const double qx = std::abs(p.x) - bx;
    const double qy = std::abs(p.y) - by;
    if (qx > 0.0 && qy > 0.0) return std::hypot(qx, qy) - rc;
    return std::max(qx, qy) - rc;
  }
  Vec2 sd_gradient(Vec2 x) const {
    const Vec2 p = x - center;
    const double qx = std::abs(p.x) - bx;
    const double qy = std::abs(p.y) - by;
    const double sx = p.x >= 0.0 ? 1.0 : -1.0;
    const double sy = p.y >= 0.0 ? 1.0 : -1.0;
    if (qx > 0.0 && qy > 0.0) {
      const double n = std::hypot(qx, qy);
      return {sx * qx / n, sy * qy / n};
    }
    if (qx > qy) return {sx, 0.0};
    return {0.0, sy};
  }
  bool on_corner(Vec2 x) const {
    const Vec2 p = x - center;
    return std::abs(p.x) - bx > 0.0 && std::abs(p.y) - by > 0.0;
  }
  double perimeter() const { return 4.0 * (bx + by) + kTwoPi * rc; }

  // Counterclockwise perimeter point at arclength u, starting at the bottom
  // of the right edge (hx, -by).
  Vec2 point_ccw(double u) const {
    u = std::fmod(u, perimeter());
    if (u < 0.0) u += perimeter();
    const double arc = 0.5 * kPi * rc;
    struct Piece { double len; };
    // right edge, NE arc, top edge, NW arc, left edge, SW arc, bottom, SE arc
    const double lens[8] = {2.0 * by, arc, 2.0 * bx, arc,
                            2.0 * by, arc, 2.0 * bx, arc};
    int k = 0;
    while (k < 7 && u > lens[k]) { u -= lens[k]; ++k; }
    Vec2 p;
    switch (k) {
      case 0: p = {hx, -by + u}; break;
      case 1: p = corner({bx, by}, 0.0, u); break;
      case 2: p = {bx - u, hy}; break;
      case 3: p = corner({-bx, by}, 0.5 * kPi, u); break;
      case 4: p = {-hx, by - u}; break;
      case 5: p = corner({-bx, -by}, kPi, u); break;
      case 6: p = {-bx + u, -hy}; break;
      default: p = corner({bx, -by}, 1.5 * kPi, u); break;
    }
    return center + p;
  }
  double ccw_arclength_of(Vec2 x) const {
    const Vec2 p = x - center;
    const double arc = 0.5 * kPi * rc;
    const double qx = std::abs(p.x) - bx;
    const double qy = std::abs(p.y) - by;
    if (qx > 0.0 && qy > 0.0) {
      // Corner arc; identify the quadrant and the in-arc angle.
      const Vec2 cc{p.x >= 0.0 ? bx : -bx, p.y >= 0.0 ? by : -by};
      const double ang = wrap_angle(std::atan2(p.y - cc.y, p.x - cc.x));
      if (p.x >= 0.0 && p.y >= 0.0) return 2.0 * by + rc * ang;
      if (p.x < 0.0 && p.y >= 0.0)
        return 2.0 * by + arc + 2.0 * bx + rc * (ang - 0.5 * kPi);
      if (p.x < 0.0 && p.y < 0.0)
        return 4.0 * by + 2.0 * arc + 2.0 * bx + rc * (ang - kPi);
      return 4.0 * by + 3.0 * arc + 4.0 * bx + rc * (ang - 1.5 * kPi);
    }
    if (qx > qy) {  // left or right edge
      if (p.x >= 0.0) return clampd(p.y + by, 0.0, 2.0 * by);
      return 2.0 * by + 2.0 * arc + 2.0 * bx +
             clampd(by - p.y, 0.0, 2.0 * by);
    }
    // top or bottom edge
    if (p.y >= 0.0)
      return 2.0 * by + arc + clampd(bx - p.x, 0.0, 2.0 * bx);
    return 4.0 * by + 3.0 * arc + 2.0 * bx + clampd(p.x + bx, 0.0, 2.0 * bx);
  }

 private:
  static double clampd(double v, double lo, double hi) {
    return std::min(hi, std::max(lo, v));
  }
  Vec2 corner(Vec2 cc, double ang0, double u) const {
    const double a = ang0 + u / rc;
    return {cc.x + rc * std::cos(a), cc.y + rc * std::sin(a)};
  }
};

class TwoBarTube final : public BoundaryCurve {
 public:
  TwoBarTube(Vec2 center, double gap, double wall_length, double thickness,
             double rc)
      : center_(center), gap_(gap), wall_length_(wall_length),
        thickness_(thickness), rc_(rc),
        lower_(Vec2{center.x, center.y - 0.5 * (gap + thickness)},
               0.5 * wall_length, 0.5 * thickness, rc),
        upper_(Vec2{center.x, center.y + 0.5 * (gap + thickness)},
               0.5 * wall_length, 0.5 * thickness, rc) {
    if (gap <= 0.0) throw SchemaError("two_bar_tube: gap must be positive");
  }
  Role role() const override { return Role::Obstacle; }
  std::string kind() const override { return "two_bar_tube"; }
  std::map<std::string, double> params() const override {
    return {{"cx", center_.x},          {"cy", center_.y},
            {"gap", gap_},              {"wall_length", wall_length_},
            {"bar_thickness", thickness_}, {"corner_radius", rc_}};
  }
  double event_value(Vec2 x) const override {
    return -std::min(lower_.sd(x), upper_.sd(x));
  }
  Vec2 event_gradient(Vec2 x) const override {
    const RoundedBox& b = nearest(x);
    return -b.sd_gradient(x);
  }
  double euclid_curvature(Vec2 x) const override {
    const RoundedBox& b = nearest(x);
    return b.on_corner(x) ? -1.0 / rc_ : 0.0;
  }
  double total_length() const override {
    return lower_.perimeter() + upper_.perimeter();
  }
  Vec2 point_at(double s) const override {
    const double l0 = lower_.perimeter();
    const double tot = total_length();
    s = std::fmod(s, tot);
    if (s < 0.0) s += tot;
    // Obstacle orientation runs the ccw parametrization backwards.
    if (s < l0) return lower_.point_ccw(l0 - s);
    return upper_.point_ccw(upper_.perimeter() - (s - l0));
  }
  double arclength_of(Vec2 x) const override {
    const double l0 = lower_.perimeter();
    if (lower_.sd(x) <= upper_.sd(x)) {
      const double u = lower_.ccw_arclength_of(x);
      return std::fmod(l0 - u + l0, l0);
    }
    const double l1 = upper_.perimeter();
    const double u = upper_.ccw_arclength_of(x);
    return l0 + std::fmod(l1 - u + l1, l1);
  }
  double bound_radius() const override {
    const double r0 = norm(lower_.center) + std::hypot(lower_.hx, lower_.hy);
    const double r1 = norm(upper_.center) + std::hypot(upper_.hx, upper_.hy);
    return std::max(r0, r1);
  }

  const RoundedBox& nearest(Vec2 x) const {
    return lower_.sd(x) <= upper_.sd(x) ? lower_ : upper_;
  }

 private:
  Vec2 center_;
  double gap_, wall_length_, thickness_, rc_;
  RoundedBox lower_, upper_;
};

}  // namespace

std::string BoundaryCurve::describe() const {
  return kind() + "{" + params_string(params()) + "}";
}

CurvePtr make_circle(Vec2 center, double radius, BoundaryCurve::Role role) {
  return std::make_shared<Circle>(center, radius, role);
}

CurvePtr make_ellipse(Vec2 center, double rx, double ry,
                      BoundaryCurve::Role role) {
  return std::make_shared<Ellipse>(center, rx, ry, role);
}

CurvePtr make_two_bar_tube(Vec2 center, double gap, double wall_length,
                           double bar_thickness, double corner_radius) {
  return std::make_shared<TwoBarTube>(center, gap, wall_length, bar_thickness,
                                      corner_radius);
}

CurvePtr make_curve(const std::string& kind,
                    const std::map<std::string, double>& params,
                    BoundaryCurve::Role role) {
  auto get = [&](const std::string& key, double fallback) {
    auto it = params.find(key);
    return it == params.end() ? fallback : it->second;
  };
  if (kind == "circle")
    return make_circle({get("cx", 0.0), get("cy", 0.0)}, get("r", 1.0), role);
  if (kind == "ellipse")
    return make_ellipse({get("cx", 0.0), get("cy", 0.0)}, get("rx", 1.0),
                        get("ry", 1.0), role);
  if (kind == "two_bar_tube") {
    if (role != BoundaryCurve::Role::Obstacle)
      throw SchemaError("two_bar_tube is only valid as an obstacle");
    return make_two_bar_tube({get("cx", 0.0), get("cy", 0.0)},
                             get("gap", 0.3), get("wall_length", 1.2),
                             get("bar_thickness", 0.2),
                             get("corner_radius", 0.02));
  }
  throw SchemaError("unknown boundary shape '" + kind + "'");
}

}  // namespace brl
