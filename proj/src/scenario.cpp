#include "brl/scenario.hpp"

#include <cstdint>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "brl/errors.hpp"

namespace brl {

namespace {

using nlohmann::json;

std::map<std::string, double> number_map(const json& j, const std::string& ctx) {
  std::map<std::string, double> out;
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!it.value().is_number())
      throw SchemaError(ctx + "." + it.key() + " must be a number");
    out[it.key()] = it.value().get<double>();
  }
  return out;
}

ProfilePtr profile_from_json(const json& j, const std::string& ctx) {
  if (!j.is_object() || !j.contains("profile"))
    throw SchemaError(ctx + " must be an object with a 'profile' key");
  const std::string name = j.at("profile").get<std::string>();
  std::map<std::string, double> params;
  if (j.contains("params")) params = number_map(j.at("params"), ctx + ".params");
  return make_profile(name, params);
}

CurvePtr curve_from_json(const json& j, BoundaryCurve::Role role,
                         const std::string& ctx) {
  if (!j.is_object() || !j.contains("shape"))
    throw SchemaError(ctx + " must be an object with a 'shape' key");
  const std::string shape = j.at("shape").get<std::string>();
  std::map<std::string, double> params;
  if (j.contains("params")) params = number_map(j.at("params"), ctx + ".params");
  return make_curve(shape, params, role);
}

void check_disjoint(const Scenario& s) {
  if (!s.obstacle) return;
  // Obstacle boundary samples must all be strictly inside M, and the outer
  // boundary strictly outside the obstacle.
  const int n = 512;
  for (int i = 0; i < n; ++i) {
    const double so = s.obstacle->total_length() * i / n;
    const Vec2 xo = s.obstacle->point_at(so);
    if (s.outer->event_value(xo) > -1e-9)
      throw SchemaError("obstacle is not strictly inside the outer boundary");
    const double se = s.outer->total_length() * i / n;
    const Vec2 xe = s.outer->point_at(se);
    if (s.obstacle->event_value(xe) > -1e-9)
      throw SchemaError("outer boundary intersects the obstacle");
  }
}

uint64_t fnv1a(const std::string& text) {
  uint64_t h = 1469598103934665603ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace

std::string Scenario::canonical() const {
  std::ostringstream os;
  os << "lambda=" << surface.lambda_profile().describe()
     << ";outer=" << (outer ? outer->describe() : "none")
     << ";obstacle=" << (obstacle ? obstacle->describe() : "none")
     << ";a=" << fmt17(a) << ";L=" << fmt17(L)
     << ";step=" << fmt17(tol.step) << ";event_tol=" << fmt17(tol.event_tol)
     << ";tangential_abort_tol=" << fmt17(tol.tangential_abort_tol)
     << ";max_reflections=" << tol.max_reflections
     << ";enclosing_radius=" << fmt17(enclosing_radius);
  return os.str();
}

std::string Scenario::hash() const {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(fnv1a(canonical())));
  return std::string(buf);
}

Scenario scenario_from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const std::exception& e) {
    throw ParseError(std::string("scenario JSON: ") + e.what());
  }
  if (!j.is_object()) throw SchemaError("scenario root must be an object");

  Scenario s;
  if (!j.contains("lambda")) throw SchemaError("scenario is missing 'lambda'");
  s.surface = ConformalSurface(profile_from_json(j.at("lambda"), "lambda"));

  if (!j.contains("outer")) throw SchemaError("scenario is missing 'outer'");
  s.outer = curve_from_json(j.at("outer"), BoundaryCurve::Role::Outer, "outer");

  if (j.contains("obstacle") && !j.at("obstacle").is_null()) {
    s.obstacle = curve_from_json(j.at("obstacle"),
                                 BoundaryCurve::Role::Obstacle, "obstacle");
  }

  if (j.contains("a")) s.a = j.at("a").get<double>();
  if (j.contains("L")) s.L = j.at("L").get<double>();
  if (j.contains("tolerances")) {
    const auto& t = j.at("tolerances");
    if (t.contains("step")) s.tol.step = t.at("step").get<double>();
    if (t.contains("event_tol")) s.tol.event_tol = t.at("event_tol").get<double>();
    if (t.contains("tangential_abort_tol"))
      s.tol.tangential_abort_tol = t.at("tangential_abort_tol").get<double>();
    if (t.contains("max_reflections"))
      s.tol.max_reflections = t.at("max_reflections").get<int>();
  }
  if (j.contains("flags")) {
    const auto& f = j.at("flags");
    if (f.contains("outer_strictly_convex"))
      s.flags.outer_strictly_convex = f.at("outer_strictly_convex").get<bool>();
    if (f.contains("convex_obstacle"))
      s.flags.convex_obstacle = f.at("convex_obstacle").get<bool>();
  }
  if (j.contains("enclosing_radius"))
    s.enclosing_radius = j.at("enclosing_radius").get<double>();
  if (s.enclosing_radius <= 0.0)
    s.enclosing_radius = 1.5 * s.outer->bound_radius();

  if (!(s.a > 0.0 && s.a <= 1.0))
    throw SchemaError("a = " + fmt17(s.a) +
                      " violates the tangential-threshold condition a in (0,1]");
  if (s.L <= 0.0) throw SchemaError("L must be positive");
  if (s.tol.step <= 0.0) throw SchemaError("tolerances.step must be positive");
  if (s.tol.event_tol <= 0.0)
    throw SchemaError("tolerances.event_tol must be positive");
  if (s.tol.tangential_abort_tol <= 0.0)
    throw SchemaError("tolerances.tangential_abort_tol must be positive");
  if (s.tol.max_reflections < 1)
    throw SchemaError("tolerances.max_reflections must be at least 1");
  check_disjoint(s);
  return s;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open scenario file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return scenario_from_json_text(ss.str());
}

Scenario make_flat_annulus(double outer_r, double obstacle_r) {
  Scenario s;
  s.surface = ConformalSurface(zero_profile());
  s.outer = make_circle({0.0, 0.0}, outer_r, BoundaryCurve::Role::Outer);
  s.obstacle = make_circle({0.0, 0.0}, obstacle_r, BoundaryCurve::Role::Obstacle);
  s.flags.outer_strictly_convex = true;
  s.flags.convex_obstacle = true;
  s.enclosing_radius = 1.5 * outer_r;
  return s;
}

Scenario make_flat_disc(double outer_r) {
  Scenario s;
  s.surface = ConformalSurface(zero_profile());
  s.outer = make_circle({0.0, 0.0}, outer_r, BoundaryCurve::Role::Outer);
  s.flags.outer_strictly_convex = true;
  s.enclosing_radius = 1.5 * outer_r;
  return s;
}

}  // namespace brl
