#pragma once

#include <map>
#include <memory>
#include <string>
#include <utility>

#include "brl/common.hpp"

namespace brl {

// Closed-form scalar function on the plane with analytic first and second
// derivatives. Used for the conformal factor, integrands and metric
// perturbations; analytic derivatives keep identity residuals free of
// interpolation error.
class ScalarProfile {
 public:
  virtual ~ScalarProfile() = default;
  virtual double value(Vec2 x) const = 0;
  virtual Vec2 gradient(Vec2 x) const = 0;
  virtual Mat2 hessian(Vec2 x) const = 0;
  // Canonical parameter string, stable across runs; feeds the manifest hash.
  virtual std::string describe() const = 0;
};

using ProfilePtr = std::shared_ptr<const ScalarProfile>;

// Registry constructors. Profile names accepted by make_profile:
//   zero                  f = 0
//   constant              f = c
//   radial_quadratic      f = c*|x-x0|^2
//   gaussian              f = a*exp(-|x-x0|^2/w^2)
//   bump                  f = a*exp(1 - 1/(1-|x-x0|^2/r^2)) inside |x-x0|<r, else 0
//   polynomial            f = c00 + c10*x1 + c01*x2 + c20*x1^2 + c11*x1*x2 + c02*x2^2
// Unknown names or parameters raise SchemaError.
ProfilePtr make_profile(const std::string& name,
                        const std::map<std::string, double>& params);

// Parses "name{k=v,k=v,...}" (or bare "name") and builds the profile.
ProfilePtr parse_profile(const std::string& text);

// The "name{k=v,...}" splitter behind parse_profile, shared by the other
// registries (fields, circle bundle functions, curves).
std::pair<std::string, std::map<std::string, double>> parse_spec_string(
    const std::string& text);

ProfilePtr zero_profile();

}  // namespace brl
