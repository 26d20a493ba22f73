#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "brl/common.hpp"

namespace brl {

// Closed C^2 boundary curve. Two roles:
//   Outer    the measurement boundary E; event_value > 0 outside M.
//   Obstacle the reflecting boundary R; event_value > 0 inside the obstacle.
// In both roles the normalized event gradient is the Euclidean unit normal
// pointing out of M, which fixes the orientation T_e = rot90(nu_e): the
// surface lies on the left when walking along T_e.
class BoundaryCurve {
 public:
  enum class Role { Outer, Obstacle };

  virtual ~BoundaryCurve() = default;

  virtual Role role() const = 0;
  virtual std::string kind() const = 0;
  virtual std::map<std::string, double> params() const = 0;

  // Signed event function: zero exactly on the curve, positive beyond it
  // (outside M / inside the obstacle), comparable to Euclidean distance in a
  // tubular neighborhood of the curve.
  virtual double event_value(Vec2 x) const = 0;
  // Direction of increasing event value; normalize to get nu_e. Valid in the
  // same tubular neighborhood.
  virtual Vec2 event_gradient(Vec2 x) const = 0;

  // Euclidean signed curvature with respect to the orientation T_e.
  virtual double euclid_curvature(Vec2 x) const = 0;

  // Arclength parametrization following the orientation T_e.
  virtual double total_length() const = 0;
  virtual Vec2 point_at(double s) const = 0;
  virtual double arclength_of(Vec2 x) const = 0;

  // Radius of a disc centered at the origin containing the curve.
  virtual double bound_radius() const = 0;

  Vec2 normal_euclid(Vec2 x) const { return normalized(event_gradient(x)); }
  Vec2 tangent_euclid(Vec2 x) const { return rot90(normal_euclid(x)); }
  std::string describe() const;
};

using CurvePtr = std::shared_ptr<const BoundaryCurve>;

CurvePtr make_circle(Vec2 center, double radius, BoundaryCurve::Role role);
CurvePtr make_ellipse(Vec2 center, double rx, double ry,
                      BoundaryCurve::Role role);

// Two parallel horizontal bars (rounded rectangles) forming a straight tube
// of width `gap` centered on the horizontal axis through `center`. A single
// obstacle boundary with two components.
CurvePtr make_two_bar_tube(Vec2 center, double gap, double wall_length,
                           double bar_thickness, double corner_radius);

// Factory keyed by shape name: circle{cx,cy,r}, ellipse{cx,cy,rx,ry},
// two_bar_tube{cx,cy,gap,wall_length,bar_thickness,corner_radius}.
CurvePtr make_curve(const std::string& kind,
                    const std::map<std::string, double>& params,
                    BoundaryCurve::Role role);

}  // namespace brl
