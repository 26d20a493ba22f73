#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "brl/scenario.hpp"

namespace brl {

// Integration state on the unit circle bundle. Storing the fiber angle
// instead of velocity components keeps |v|_g = 1 exact by construction.
struct SMState {
  Vec2 x;
  double theta = 0.0;
};

struct RaySample {
  double t = 0.0;
  Vec2 x;
  double theta = 0.0;
};

struct RaySegment {
  double t0 = 0.0;
  double t1 = 0.0;
  std::vector<RaySample> samples;  // uniform step spacing, short final interval
};

struct ReflectionEvent {
  double t = 0.0;
  Vec2 x;
  Vec2 v_in, v_out;      // g-unit
  double incidence = 0.0;  // <v_in, nu>_g, in [0,1] (nu points out of M)
  bool tangential_flag = false;  // incidence < scenario a
};

enum class Termination { ExitAtE, MaxTimeExceeded, TangentialAbort };

struct BrokenRay {
  std::vector<RaySegment> segments;
  std::vector<ReflectionEvent> reflections;
  Termination termination = Termination::ExitAtE;
  double tau = 0.0;
  SMState entry;
  SMState exit;  // valid when termination == ExitAtE
  int reflection_count() const { return static_cast<int>(reflections.size()); }
};

// Advances the geodesic ODE in (x, theta) by dt with one classical RK4 step.
SMState step_geodesic(const Scenario& scenario, const SMState& state, double dt);

// Specular reflection v - 2<v,nu>_g nu at x on the curve.
Vec2 reflect_direction(const Scenario& scenario, const BoundaryCurve& curve,
                       Vec2 x, Vec2 v_in);

BrokenRay trace_broken_ray(const Scenario& scenario, Vec2 x0, double theta0);
BrokenRay trace_broken_ray(const Scenario& scenario, Vec2 x0, Vec2 v0);

// Exit time; empty when the ray hit the travel-time cap.
std::optional<double> exit_time(const Scenario& scenario, Vec2 x0, double theta0);

struct FanEntry {
  Vec2 x;
  double theta = 0.0;
  double entry_s = 0.0;  // arclength coordinate on E
};

// Tensor fan over E: n_points arclength cells x n_angles inward directions,
// endpoints excluded on both axes.
std::vector<FanEntry> make_boundary_fan(const Scenario& scenario,
                                        std::size_t n_points,
                                        std::size_t n_angles);

struct ScatterRow {
  std::size_t ray_id = 0;
  double entry_s = 0.0;
  Vec2 entry_x;
  double entry_theta = 0.0;
  double exit_s = 0.0;
  Vec2 exit_x;
  double exit_theta = 0.0;
  double tau = 0.0;
  int n_reflections = 0;
  Termination termination = Termination::ExitAtE;
};

std::vector<ScatterRow> scattering_relation(const Scenario& scenario,
                                            const std::vector<FanEntry>& fan);

struct ConditionReport {
  double max_K = 0.0;
  double min_kappa_E = 0.0;
  double max_tau = 0.0;
  int max_reflections = 0;
  std::size_t multi_near_tangential = 0;  // rays with >= 2 reflections of incidence < a
  std::size_t multi_reflection = 0;       // rays with >= 2 reflections
  std::size_t aborted = 0;                 // tangential aborts
  std::size_t capped = 0;                  // hit the L cap
  std::size_t n_rays = 0;
};

ConditionReport validate_scenario(const Scenario& scenario, std::size_t n_rays);

// True when x is inside M by more than `margin` in event-function units.
bool inside_surface(const Scenario& scenario, Vec2 x, double margin = 0.0);

std::string termination_name(Termination t);

}  // namespace brl
