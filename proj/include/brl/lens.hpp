#pragma once

#include <string>

#include "brl/scenario.hpp"
#include "brl/transform.hpp"

namespace brl {

// One-parameter conformal family around a base scenario: the log conformal
// factor flexes as lambda + s*h while the curves, thresholds and integrator
// settings stay fixed.
struct MetricFamily {
  Scenario base;
  ProfilePtr h;

  // Scenario with metric exp(2(lambda + s*h)) delta; returns the base
  // unchanged at s = 0.
  Scenario scenario_at(double s) const;
};

MetricFamily make_metric_family(const Scenario& base, ProfilePtr h);
MetricFamily make_metric_family(const Scenario& base, const std::string& h_spec);

// Travel data of the broken ray launched from the same boundary point and
// fiber angle in the perturbed metric.  Throws RayDidNotExit when the ray
// fails to leave through the outer curve.
struct TravelData {
  double tau = 0.0;
  Vec2 exit_x{0.0, 0.0};
  double exit_theta = 0.0;
  int reflections = 0;
};

TravelData perturbed_travel_data(const MetricFamily& family, Vec2 x0,
                                 double theta0, double s);

// Linearization of travel time in the conformal parameter: the transform of
// the perturbation rate along the base ray equals the s-derivative of travel
// time minus the exit-motion term,
//   integral of h over the base ray
//     = d/ds tau_s - <base exit velocity, d/ds exit point>_g.
// Both derivatives use five-point central stencils; the exit derivative is
// taken in the arclength coordinate of the outer curve and converted to a
// tangent vector.  Throws ReflectionPatternChanged when the stencil rays do
// not share the base reflection pattern.
struct LinearizationReport {
  double lhs = 0.0;           // transform of h on the base ray
  double rhs_tau = 0.0;       // d/ds tau_s at s = 0
  double rhs_endpoint = 0.0;  // <exit velocity, d/ds exit>_g
  double residual = 0.0;      // |lhs - (rhs_tau - rhs_endpoint)|
  double residual_no_endpoint = 0.0;  // ablation: |lhs - rhs_tau|
  double s_fd = 0.0;
  int reflections = 0;
  // Unreflected broken rays are chords; with a convex obstacle in the flat
  // case these are exactly the length-minimizing ones.
  bool minimizing_hint = false;
};

LinearizationReport linearization_residual(const MetricFamily& family, Vec2 x0,
                                           double theta0, double s_fd = 1e-3);

// Entry-varying form on a single launch: the entry point slides along the
// outer curve at rate ds_entry and the launch angle at rate dtheta while the
// metric flexes, so the entry term <v0, d/ds entry>_g joins the identity:
//   lhs = rhs_tau + rhs_entry - rhs_exit.
struct GeodesicLinearizationReport {
  double lhs = 0.0;
  double rhs_tau = 0.0;
  double rhs_entry = 0.0;
  double rhs_exit = 0.0;
  double residual = 0.0;
  double s_fd = 0.0;
  int reflections = 0;
};

GeodesicLinearizationReport geodesic_linearization_check(
    const MetricFamily& family, double entry_s, double theta0, double ds_entry,
    double dtheta, double s_fd = 1e-3);

// Largest step from s_max, s_max/2, ... whose five-point stencil keeps the
// base reflection pattern; 0 when even the smallest probe breaks it.
double pattern_stable_step(const MetricFamily& family, Vec2 x0, double theta0,
                           double s_max = 1e-2);

}  // namespace brl
