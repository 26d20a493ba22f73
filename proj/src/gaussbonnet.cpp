#include "brl/gaussbonnet.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "brl/errors.hpp"

namespace brl {

namespace {

double oriented_angle(Vec2 a, Vec2 b) {
  return wrap_angle(std::atan2(cross(a, b), dot(a, b)));
}

double polygon_signed_area(const std::vector<Vec2>& p) {
  double a = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const Vec2& u = p[i];
    const Vec2& w = p[(i + 1) % p.size()];
    a += cross(u, w);
  }
  return 0.5 * a;
}

// Scanline even-odd quadrature of K e^{2 lambda} over the polygon interior.
double curvature_area_integral(const ConformalSurface& surf,
                               const std::vector<Vec2>& poly, int n) {
  double lo_x = poly[0].x, hi_x = poly[0].x, lo_y = poly[0].y, hi_y = poly[0].y;
  for (const Vec2& p : poly) {
    lo_x = std::min(lo_x, p.x);
    hi_x = std::max(hi_x, p.x);
    lo_y = std::min(lo_y, p.y);
    hi_y = std::max(hi_y, p.y);
  }
  const double dx = (hi_x - lo_x) / n, dy = (hi_y - lo_y) / n;
  if (dx <= 0.0 || dy <= 0.0) return 0.0;

  std::vector<double> contrib;
  std::vector<double> crossings;
  for (int row = 0; row < n; ++row) {
    const double y = lo_y + (row + 0.5) * dy;
    crossings.clear();
    for (std::size_t i = 0; i < poly.size(); ++i) {
      const Vec2& p = poly[i];
      const Vec2& q = poly[(i + 1) % poly.size()];
      if ((p.y > y) != (q.y > y))
        crossings.push_back(p.x + (y - p.y) * (q.x - p.x) / (q.y - p.y));
    }
    std::sort(crossings.begin(), crossings.end());
    for (std::size_t k = 0; k + 1 < crossings.size(); k += 2) {
      int c0 = static_cast<int>(std::ceil((crossings[k] - lo_x) / dx - 0.5));
      int c1 = static_cast<int>(std::floor((crossings[k + 1] - lo_x) / dx - 0.5));
      c0 = std::max(c0, 0);
      c1 = std::min(c1, n - 1);
      for (int c = c0; c <= c1; ++c) {
        const Vec2 x{lo_x + (c + 0.5) * dx, y};
        const double e = surf.conf(x);
        contrib.push_back(surf.gauss_curvature(x) * e * e * dx * dy);
      }
    }
  }
  return pairwise_sum(contrib);
}

}  // namespace

GaussBonnetBreakdown gauss_bonnet_check(const Scenario& scenario,
                                        const BoundaryCurve& curve,
                                        const RaySegment& chord,
                                        int area_grid) {
  if (chord.samples.size() < 2)
    throw Error("gauss_bonnet_check needs a sampled chord");
  const ConformalSurface& surf = scenario.surface;
  const RaySample& first = chord.samples.front();
  const RaySample& last = chord.samples.back();
  for (const Vec2 x : {first.x, last.x}) {
    if (std::abs(curve.event_value(x)) > 1e-5)
      throw PointNotOnBoundary("chord endpoint off the curve by " +
                               fmt17(curve.event_value(x)));
  }

  // sigma runs from the chord's end back to its start so that the
  // concatenation sigma ^ gamma closes up; the parameter direction is fixed
  // by requiring counterclockwise rotation around the enclosed region.
  const double L = curve.total_length();
  const double sA = curve.arclength_of(last.x);
  const double sB = curve.arclength_of(first.x);
  double d_fwd = std::fmod(sB - sA + L, L);
  if (d_fwd == 0.0) d_fwd = L;

  const std::size_t m_arc = 512;
  auto build_poly = [&](int dir, double span) {
    std::vector<Vec2> poly;
    poly.reserve(chord.samples.size() + m_arc);
    for (const RaySample& s : chord.samples) poly.push_back(s.x);
    for (std::size_t k = 1; k < m_arc; ++k) {
      const double u = span * static_cast<double>(k) / m_arc;
      poly.push_back(curve.point_at(std::fmod(sA + dir * u + 2.0 * L, L)));
    }
    return poly;
  };
  const std::vector<Vec2> poly_f = build_poly(+1, d_fwd);
  const std::vector<Vec2> poly_b = build_poly(-1, L - d_fwd);
  const double area_f = polygon_signed_area(poly_f);
  const double area_b = polygon_signed_area(poly_b);
  const int dir = area_f >= area_b ? +1 : -1;
  const double span = dir > 0 ? d_fwd : L - d_fwd;
  const std::vector<Vec2>& poly = dir > 0 ? poly_f : poly_b;
  if (std::max(area_f, area_b) <= 0.0)
    throw Error("chord and arc do not enclose a positively oriented region");

  GaussBonnetBreakdown out;

  // <D_t sigma', nu> = -kappa_g, integrated in g-arclength: Simpson over the
  // Euclidean arclength parameter with the e^{lambda} length factor.
  {
    const std::size_t panels = 2048;  // even
    const double h = span / panels;
    std::vector<double> vals(panels + 1);
    for (std::size_t k = 0; k <= panels; ++k) {
      const Vec2 x =
          curve.point_at(std::fmod(sA + dir * (h * k) + 2.0 * L, L));
      vals[k] = -signed_curvature(surf, curve, x) * surf.conf(x);
    }
    double acc = vals[0] + vals[panels];
    for (std::size_t k = 1; k < panels; ++k)
      acc += (k % 2 ? 4.0 : 2.0) * vals[k];
    out.arc_term = acc * h / 3.0;
  }

  out.area_term = curvature_area_integral(surf, poly, area_grid);

  const Vec2 g_end{std::cos(last.theta), std::sin(last.theta)};
  const Vec2 g_start{std::cos(first.theta), std::sin(first.theta)};
  const Vec2 s_start = dir * curve.tangent_euclid(curve.point_at(sA));
  const Vec2 s_end = dir * curve.tangent_euclid(curve.point_at(
                               std::fmod(sA + dir * span + 2.0 * L, L)));
  out.alpha = oriented_angle(g_end, s_start);
  out.beta = oriented_angle(s_end, g_start);

  out.residual =
      std::abs(out.area_term - out.arc_term - (kTwoPi - (out.alpha + out.beta)));
  return out;
}

RaySegment find_double_hit(const Scenario& scenario, std::size_t n_rays) {
  const std::size_t side = std::max<std::size_t>(
      2, static_cast<std::size_t>(std::lround(std::sqrt(double(n_rays)))));
  const auto fan = make_boundary_fan(scenario, side, side);
  for (const FanEntry& e : fan) {
    const BrokenRay ray = trace_broken_ray(scenario, e.x, e.theta);
    if (ray.reflection_count() >= 2 && ray.segments.size() >= 3)
      return ray.segments[1];
  }
  throw NoDoubleHit("no geodesic segment joins two obstacle reflections among " +
                    std::to_string(fan.size()) + " sampled rays");
}

}  // namespace brl
