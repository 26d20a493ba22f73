#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "brl/raytrace.hpp"

namespace brl {

// Scalar integrand on M. Profile-backed fields cover the registry; the
// inversion module adds the tube-supported null field.
class ScalarField {
 public:
  virtual ~ScalarField() = default;
  virtual double value(Vec2 x) const = 0;
  virtual Vec2 gradient(Vec2 x) const = 0;
  virtual std::string describe() const = 0;
};

using FieldPtr = std::shared_ptr<const ScalarField>;

FieldPtr field_from_profile(ProfilePtr p);
FieldPtr parse_field(const std::string& text);  // same syntax as parse_profile

struct TransformSample {
  SMState entry;
  double entry_s = 0.0;
  double value = 0.0;  // u^f
  double tau = 0.0;
  int n_reflections = 0;
  Termination termination = Termination::ExitAtE;
  bool ok() const { return termination == Termination::ExitAtE; }
};

// Per-sample quadrature weights for one ray segment: composite Simpson over
// the uniform spacing with a 3-point rule absorbing the short final
// interval. Weights sum to the segment length exactly (up to round-off).
std::vector<double> segment_weights(const RaySegment& seg);

double integrate_along_ray(const BrokenRay& ray,
                           const std::function<double(Vec2)>& f);

// u^f(x, v) = integral of f along the broken ray from (x, v).
TransformSample brt_forward(const Scenario& scenario, const ScalarField& f,
                            Vec2 x, double theta);

std::vector<TransformSample> fan_transform(const Scenario& scenario,
                                           const ScalarField& f,
                                           const std::vector<FanEntry>& fan);

// |(u^f(phi_h(x,v)) - u^f(x,v))/h + f(x)|, the transport-equation residual.
double transport_residual(const Scenario& scenario, const ScalarField& f,
                          Vec2 x, double theta, double h);

// |u^f(x,v) + u^f(x,-v) - I(f)| with I(f) an independent quadrature over the
// full through-going broken ray.
double symmetry_residual(const Scenario& scenario, const ScalarField& f,
                         Vec2 x, double theta);

// Boundary data: u-values on inward boundary vectors.
using BoundaryData = std::function<double(Vec2 x, double theta)>;

struct BoundaryRecovery {
  double estimate = 0.0;
  double ratios[3] = {0.0, 0.0, 0.0};  // raw u/tau at chord lengths h, h/2, h/4
};

// Recovers f(x) for x on E from short-chord ratios u/tau extrapolated to the
// tangential limit (two-step Richardson over chord lengths {h, h/2, h/4}).
BoundaryRecovery boundary_recovery(const Scenario& scenario,
                                   const BoundaryData& data, Vec2 x,
                                   double h = 0.05);

}  // namespace brl
