#pragma once

#include <optional>
#include <string>

#include "brl/curves.hpp"
#include "brl/surface.hpp"

namespace brl {

struct Tolerances {
  double step = 1e-3;
  double event_tol = 1e-10;
  double tangential_abort_tol = 1e-4;
  int max_reflections = 500;
};

// Optional geometry hints declared by the scenario author; validate reports
// against them and property checks key off them.
struct ScenarioFlags {
  bool outer_strictly_convex = false;
  bool convex_obstacle = false;
};

struct Scenario {
  ConformalSurface surface{zero_profile()};
  CurvePtr outer;
  CurvePtr obstacle;  // null for disc geometry
  double a = 0.1;     // tangential-incidence threshold, in (0, 1]
  double L = 20.0;    // travel-time cap
  Tolerances tol;
  ScenarioFlags flags;
  double enclosing_radius = 0.0;  // guard disc for LeftDomain

  // Canonical resolved-parameter string; stable across platforms, feeds the
  // manifest hash.
  std::string canonical() const;
  // FNV-1a of canonical().
  std::string hash() const;
};

Scenario load_scenario(const std::string& path);
Scenario scenario_from_json_text(const std::string& text);

// Convenience builders used across tests.
Scenario make_flat_annulus(double outer_r = 1.0, double obstacle_r = 0.25);
Scenario make_flat_disc(double outer_r = 1.0);

}  // namespace brl
