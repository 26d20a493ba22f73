#include "brl/report.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "brl/common.hpp"
#include "brl/errors.hpp"
#include "brl/inversion.hpp"
#include "brl/jacobi.hpp"
#include "brl/lens.hpp"
#include "brl/pestov.hpp"
#include "brl/raytrace.hpp"
#include "brl/scenario.hpp"
#include "brl/smfun.hpp"
#include "brl/transform.hpp"

namespace brl {

std::string tool_version() { return "brl 0.1.0"; }

Json manifest_json(const RunManifest& m) {
  Json j;
  j["tool_version"] = m.tool_version;
  j["subcommand"] = m.subcommand;
  j["scenario_hash"] = m.scenario_hash;
  j["scenario"] = m.scenario_canonical;
  j["seed"] = m.seed;
  j["threads"] = m.threads;
  j["outputs"] = m.outputs;
  j["summary"] = m.summary;
  return j;
}

std::string dump_json(const Json& j) { return j.dump(2) + "\n"; }

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  out << text;
  if (!out) throw Error("failed writing '" + path + "'");
}

std::string csv_table(const std::vector<std::string>& header,
                      const std::vector<std::vector<double>>& rows) {
  std::ostringstream os;
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (i) os << ",";
    os << header[i];
  }
  os << "\n";
  for (const auto& row : rows) {
    if (row.size() != header.size())
      throw DimensionMismatch("csv row width does not match header");
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) os << ",";
      os << fmt17(row[i]);
    }
    os << "\n";
  }
  return os.str();
}

namespace {

bool logging_enabled() {
  const char* v = std::getenv("BRL_LOG");
  return v != nullptr && v[0] != '\0';
}

void log_line(const std::string& text) {
  if (logging_enabled()) std::cerr << "[brl] " << text << "\n";
}

struct GlobalOpts {
  std::string scenario_path;
  std::string out_dir = ".";
  int threads = 1;
  long long seed = 0;
};

// Files produced by one subcommand, written together with the manifest.
struct RunOutput {
  std::vector<std::pair<std::string, std::string>> files;  // name -> content
  Json summary;
};

Json stats_json(double lo, double hi) {
  return Json{{"min", lo}, {"max", hi}};
}

Json curve_json(const Scenario& scenario, const BoundaryCurve& curve) {
  const int n = 256;
  double ke_lo = 0.0, ke_hi = 0.0, kg_lo = 0.0, kg_hi = 0.0;
  for (int i = 0; i < n; ++i) {
    const Vec2 x = curve.point_at(curve.total_length() * i / n);
    const double ke = curve.euclid_curvature(x);
    const double kg = signed_curvature(scenario.surface, curve, x);
    if (i == 0 || ke < ke_lo) ke_lo = ke;
    if (i == 0 || ke > ke_hi) ke_hi = ke;
    if (i == 0 || kg < kg_lo) kg_lo = kg;
    if (i == 0 || kg > kg_hi) kg_hi = kg;
  }
  Json j;
  j["kind"] = curve.kind();
  j["params"] = curve.params();
  j["length"] = curve.total_length();
  j["euclid_curvature"] = stats_json(ke_lo, ke_hi);
  j["signed_curvature_g"] = stats_json(kg_lo, kg_hi);
  return j;
}

RunOutput run_geom(const Scenario& scenario) {
  Json j;
  j["outer"] = curve_json(scenario, *scenario.outer);
  j["obstacle"] =
      scenario.obstacle ? curve_json(scenario, *scenario.obstacle) : Json();

  const double R = scenario.outer->bound_radius();
  const int n = 128;
  double k_lo = 0.0, k_hi = 0.0, c_lo = 0.0, c_hi = 0.0;
  bool first = true;
  for (int iy = 0; iy < n; ++iy) {
    for (int ix = 0; ix < n; ++ix) {
      const Vec2 x{-R + (2.0 * R) * (ix + 0.5) / n,
                   -R + (2.0 * R) * (iy + 0.5) / n};
      if (!inside_surface(scenario, x)) continue;
      const double K = scenario.surface.gauss_curvature(x);
      const double c = scenario.surface.conf(x);
      if (first || K < k_lo) k_lo = K;
      if (first || K > k_hi) k_hi = K;
      if (first || c < c_lo) c_lo = c;
      if (first || c > c_hi) c_hi = c;
      first = false;
    }
  }
  j["gauss_curvature"] = stats_json(k_lo, k_hi);
  j["conformal_factor"] = stats_json(c_lo, c_hi);
  j["a"] = scenario.a;
  j["L"] = scenario.L;
  j["enclosing_radius"] = scenario.enclosing_radius;
  j["flags"] = Json{{"outer_strictly_convex", scenario.flags.outer_strictly_convex},
                    {"convex_obstacle", scenario.flags.convex_obstacle}};

  RunOutput out;
  out.files.emplace_back("geom.json", dump_json(j));
  out.summary = Json{{"gauss_curvature_max", k_hi}};
  return out;
}

RunOutput run_validate(const Scenario& scenario, int n_rays) {
  const ConditionReport rep =
      validate_scenario(scenario, static_cast<std::size_t>(n_rays));
  Json j;
  j["n_rays"] = rep.n_rays;
  j["max_K"] = rep.max_K;
  j["min_kappa_E"] = rep.min_kappa_E;
  j["max_tau"] = rep.max_tau;
  j["max_reflections"] = rep.max_reflections;
  j["multi_near_tangential"] = rep.multi_near_tangential;
  j["multi_reflection"] = rep.multi_reflection;
  j["aborted"] = rep.aborted;
  j["capped"] = rep.capped;
  RunOutput out;
  out.files.emplace_back("validate.json", dump_json(j));
  out.summary = Json{{"n_rays", rep.n_rays},
                     {"max_reflections", rep.max_reflections},
                     {"aborted", rep.aborted}};
  return out;
}

Json state_json(const SMState& s) {
  return Json{{"x", s.x.x}, {"y", s.x.y}, {"theta", s.theta}};
}

RunOutput run_trace(const Scenario& scenario, double entry_s, double theta,
                    bool csv) {
  const Vec2 x0 = scenario.outer->point_at(entry_s);
  const BrokenRay ray = trace_broken_ray(scenario, x0, theta);

  Json j;
  j["entry_s"] = entry_s;
  j["entry"] = state_json(ray.entry);
  j["termination"] = termination_name(ray.termination);
  j["tau"] = ray.tau;
  j["n_reflections"] = ray.reflection_count();
  if (ray.termination == Termination::ExitAtE) j["exit"] = state_json(ray.exit);
  Json refl = Json::array();
  for (const ReflectionEvent& e : ray.reflections) {
    refl.push_back(Json{{"t", e.t},
                        {"x", e.x.x},
                        {"y", e.x.y},
                        {"incidence", e.incidence},
                        {"tangential", e.tangential_flag}});
  }
  j["reflections"] = refl;
  Json segs = Json::array();
  for (const RaySegment& seg : ray.segments) {
    segs.push_back(Json{{"t0", seg.t0},
                        {"t1", seg.t1},
                        {"n_samples", seg.samples.size()}});
  }
  j["segments"] = segs;

  RunOutput out;
  out.files.emplace_back("trace.json", dump_json(j));
  if (csv) {
    std::vector<std::vector<double>> rows;
    for (std::size_t si = 0; si < ray.segments.size(); ++si) {
      for (const RaySample& s : ray.segments[si].samples) {
        rows.push_back({static_cast<double>(si), s.t, s.x.x, s.x.y, s.theta});
      }
    }
    out.files.emplace_back("trace.csv",
                           csv_table({"seg", "t", "x", "y", "theta"}, rows));
  }
  out.summary = Json{{"tau", ray.tau},
                     {"n_reflections", ray.reflection_count()},
                     {"termination", termination_name(ray.termination)}};
  return out;
}

Json vec_json(Vec2 v) { return Json{{"x", v.x}, {"y", v.y}}; }

RunOutput run_jacobi(const Scenario& scenario, double entry_s, double theta,
                     double dx1, double dx2, double dtheta, bool csv) {
  const Vec2 x0 = scenario.outer->point_at(entry_s);
  const BrokenRay ray = trace_broken_ray(scenario, x0, theta);
  const auto [J0, DJ0] = variation_initial_data(scenario.surface, x0, theta,
                                                Vec2{dx1, dx2}, dtheta);
  const JacobiFrame frame = propagate_jacobi(scenario, ray, J0, DJ0);
  const GrowthEnvelope env = growth_envelope(scenario, ray, frame);

  Json j;
  j["entry_s"] = entry_s;
  j["termination"] = termination_name(ray.termination);
  j["tau"] = ray.tau;
  j["J0"] = vec_json(J0);
  j["DJ0"] = vec_json(DJ0);
  const JacobiSample& last = frame.samples.back();
  j["J_end"] = vec_json(last.J);
  j["DJ_end"] = vec_json(last.DJ);
  Json jumps = Json::array();
  for (const JumpRecord& r : frame.jumps) {
    jumps.push_back(Json{{"t", r.t},
                         {"J_minus", vec_json(r.J_minus)},
                         {"DJ_minus", vec_json(r.DJ_minus)},
                         {"J_plus", vec_json(r.J_plus)},
                         {"DJ_plus", vec_json(r.DJ_plus)}});
  }
  j["jumps"] = jumps;
  j["envelope"] = Json{{"A", env.A},
                       {"B", env.B},
                       {"violations", env.violations},
                       {"gronwall_C", env.gronwall_C},
                       {"gronwall_violations", env.gronwall_violations}};

  RunOutput out;
  out.files.emplace_back("jacobi.json", dump_json(j));
  if (csv) {
    std::vector<std::vector<double>> rows;
    for (const JacobiSample& s : frame.samples) {
      rows.push_back({s.t, s.J.x, s.J.y, s.DJ.x, s.DJ.y});
    }
    out.files.emplace_back(
        "jacobi.csv", csv_table({"t", "J1", "J2", "DJ1", "DJ2"}, rows));
  }
  out.summary = Json{{"tau", ray.tau}, {"envelope_B", env.B}};
  return out;
}

RunOutput run_brt(const Scenario& scenario, const std::string& field_spec,
                  int n_points, int n_angles) {
  const FieldPtr f = parse_field(field_spec);
  const auto fan = make_boundary_fan(scenario, static_cast<std::size_t>(n_points),
                                     static_cast<std::size_t>(n_angles));
  const auto samples = fan_transform(scenario, *f, fan);

  std::vector<std::vector<double>> rows;
  rows.reserve(samples.size());
  std::size_t n_ok = 0;
  double v_lo = 0.0, v_hi = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const TransformSample& s = samples[i];
    const double ok = s.ok() ? 1.0 : 0.0;
    if (s.ok()) {
      if (n_ok == 0 || s.value < v_lo) v_lo = s.value;
      if (n_ok == 0 || s.value > v_hi) v_hi = s.value;
      ++n_ok;
    }
    rows.push_back({static_cast<double>(i), s.entry_s, s.entry.theta, s.value,
                    s.tau, static_cast<double>(s.n_reflections), ok});
  }

  Json j;
  j["field"] = f->describe();
  j["n_points"] = n_points;
  j["n_angles"] = n_angles;
  j["n_rays"] = samples.size();
  j["n_ok"] = n_ok;
  j["value"] = stats_json(v_lo, v_hi);

  RunOutput out;
  out.files.emplace_back("brt.json", dump_json(j));
  out.files.emplace_back(
      "brt.csv",
      csv_table({"ray", "entry_s", "theta", "value", "tau", "n_reflections", "ok"},
                rows));
  out.summary = Json{{"field", f->describe()}, {"n_ok", n_ok}};
  return out;
}

RunOutput run_pestov(const Scenario& scenario, const std::string& u_spec,
                     int n_cells, int n_theta, int n_bdry) {
  const SMFunctionPtr u = parse_circle_function(u_spec);

  // The interior identity holds for every smooth u; the full one additionally
  // needs u to vanish over E and be reflection-even over R, so its residual
  // doubles as an admissibility probe.
  const auto residuals_at = [&](int cells, int bdry, Json* terms) {
    const PestovGrids grids = make_pestov_grids(scenario, cells, n_theta, bdry);
    const PestovInteriorReport rin = pestov_interior_identity(scenario, grids, *u);
    const PestovFullReport rfull = pestov_full_residual(scenario, grids, *u);
    if (terms != nullptr) {
      (*terms)["interior"] = Json{{"lhs", rin.lhs},
                                  {"xv", rin.xv_term},
                                  {"x", rin.x_term},
                                  {"curvature", rin.curv_term},
                                  {"boundary", rin.bdry_term}};
      (*terms)["full"] = Json{{"lhs", rfull.lhs},
                              {"xv", rfull.xv_term},
                              {"x", rfull.x_term},
                              {"curvature", rfull.curv_term},
                              {"kappa", rfull.kappa_term}};
    }
    return std::make_pair(rin.residual, rfull.residual);
  };

  Json terms;
  const auto [res_fine, full_fine] = residuals_at(n_cells, n_bdry, &terms);
  const auto [res_coarse, full_coarse] = residuals_at(n_cells / 2, n_bdry / 2, nullptr);
  (void)full_coarse;

  Json j;
  j["u"] = u->describe();
  j["grid"] = n_cells;
  j["n_theta"] = n_theta;
  j["n_bdry"] = n_bdry;
  j["terms"] = terms;
  j["residual"] = res_fine;
  j["full_residual"] = full_fine;
  j["grid_orders"] = Json{{"coarse_grid", n_cells / 2},
                          {"coarse_residual", res_coarse},
                          {"ratio", res_coarse / std::max(res_fine, 1e-300)}};

  RunOutput out;
  out.files.emplace_back("pestov.json", dump_json(j));
  out.summary = Json{{"u", u->describe()}, {"residual", res_fine}};
  return out;
}

RunOutput run_invert(const Scenario& scenario, int grid_n, int n_points,
                     int n_angles, double mu, const std::string& truth_spec) {
  const PixelBasis basis = make_pixel_basis(scenario, grid_n);
  const auto fan = make_boundary_fan(scenario, static_cast<std::size_t>(n_points),
                                     static_cast<std::size_t>(n_angles));
  log_line("assembling " + std::to_string(fan.size()) + " rays");
  const ForwardOperator op = assemble_forward_matrix(scenario, basis, fan);
  const SpectrumReport spec = singular_spectrum(op.A);

  Json j;
  j["grid"] = grid_n;
  j["n_active_cells"] = basis.active_count();
  j["n_rays"] = op.A.rows();
  j["n_excluded"] = op.n_excluded;
  j["sigma_max"] = spec.sigma_max;
  j["sigma_min"] = spec.sigma_min;
  j["effective_rank"] = spec.effective_rank;
  Json sv = Json::array();
  for (Eigen::Index i = 0; i < spec.singular_values.size(); ++i)
    sv.push_back(spec.singular_values[i]);
  j["singular_values"] = sv;

  RunOutput out;
  if (!truth_spec.empty()) {
    const FieldPtr truth = parse_field(truth_spec);
    const Eigen::VectorXd coeff = discretize_field(basis, *truth);
    const Eigen::VectorXd data = op.A * coeff;
    const double mu_used = mu >= 0.0 ? mu : default_mu(spec);
    const ReconstructionReport rec = reconstruct(op.A, data, mu_used, &coeff);
    j["truth"] = truth->describe();
    j["mu"] = mu_used;
    j["rel_error"] = rec.rel_error.value();
    out.summary = Json{{"rel_error", rec.rel_error.value()}};
  } else {
    out.summary = Json{{"sigma_min", spec.sigma_min}};
  }
  out.files.emplace_back("invert.json", dump_json(j));
  return out;
}

RunOutput run_lens(const Scenario& scenario, const std::string& h_spec,
                   double entry_s, double theta, double s_fd) {
  const MetricFamily family = make_metric_family(scenario, h_spec);
  const Vec2 x0 = scenario.outer->point_at(entry_s);
  const LinearizationReport rep =
      linearization_residual(family, x0, theta, s_fd);

  Json j;
  j["h"] = family.h->describe();
  j["entry_s"] = entry_s;
  j["theta"] = theta;
  j["s_fd"] = rep.s_fd;
  j["lhs"] = rep.lhs;
  j["rhs_tau"] = rep.rhs_tau;
  j["rhs_endpoint"] = rep.rhs_endpoint;
  j["residual"] = rep.residual;
  j["residual_no_endpoint"] = rep.residual_no_endpoint;
  j["reflections"] = rep.reflections;
  j["minimizing_hint"] = rep.minimizing_hint;

  RunOutput out;
  out.files.emplace_back("lens.json", dump_json(j));
  out.summary = Json{{"residual", rep.residual}};
  return out;
}

}  // namespace

int run_cli(const std::vector<std::string>& args) {
  CLI::App app{"numerical laboratory for the broken ray transform"};
  app.set_help_flag("--help", "print usage");
  app.set_version_flag("--version", tool_version());
  app.require_subcommand(1);

  GlobalOpts g;
  app.add_option("--scenario", g.scenario_path, "scenario JSON file")->required();
  app.add_option("--out", g.out_dir, "output directory");
  app.add_option("--threads", g.threads, "worker thread count");
  app.add_option("--seed", g.seed, "seed recorded in the manifest");

  auto* geom = app.add_subcommand("geom", "geometry summary");
  geom->fallthrough();

  auto* validate = app.add_subcommand("validate", "trace a fan and report ray statistics");
  validate->fallthrough();
  int validate_rays = 1000;
  validate->add_option("--rays", validate_rays, "fan size")
      ->check(CLI::PositiveNumber);

  auto* trace = app.add_subcommand("trace", "trace one broken ray");
  trace->fallthrough();
  double entry_s = 0.0, theta = 0.0;
  bool want_csv = false;
  trace->add_option("--entry-s", entry_s, "entry arclength on the outer curve")
      ->required();
  trace->add_option("--theta", theta, "launch fiber angle")->required();
  trace->add_flag("--csv", want_csv, "also write per-sample CSV");

  auto* jacobi = app.add_subcommand("jacobi", "propagate a Jacobi field along a ray");
  jacobi->fallthrough();
  double j_entry_s = 0.0, j_theta = 0.0, j_dx1 = 0.0, j_dx2 = 0.0, j_dtheta = 1.0;
  bool j_csv = false;
  jacobi->add_option("--entry-s", j_entry_s, "entry arclength")->required();
  jacobi->add_option("--theta", j_theta, "launch fiber angle")->required();
  jacobi->add_option("--dx1", j_dx1, "variation of the entry point, x");
  jacobi->add_option("--dx2", j_dx2, "variation of the entry point, y");
  jacobi->add_option("--dtheta", j_dtheta, "variation of the launch angle");
  jacobi->add_flag("--csv", j_csv, "also write per-sample CSV");

  auto* brt = app.add_subcommand("brt", "broken ray transform of a field over a fan");
  brt->fallthrough();
  std::string field_spec = "constant{c=1}";
  int brt_points = 32, brt_angles = 32;
  brt->add_option("--f", field_spec, "field spec, e.g. gaussian{a=1,w=0.3}");
  brt->add_option("--points", brt_points, "fan points")->check(CLI::PositiveNumber);
  brt->add_option("--angles", brt_angles, "fan angles")->check(CLI::PositiveNumber);

  auto* pestov = app.add_subcommand("pestov", "energy identity residuals");
  pestov->fallthrough();
  std::string u_spec = "sincos";
  int p_cells = 96, p_theta = 64, p_bdry = 256;
  pestov->add_option("--u", u_spec, "circle bundle function spec");
  pestov->add_option("--grid", p_cells, "cells per side")->check(CLI::PositiveNumber);
  pestov->add_option("--ntheta", p_theta, "fiber nodes")->check(CLI::PositiveNumber);
  pestov->add_option("--nbdry", p_bdry, "boundary nodes")->check(CLI::PositiveNumber);

  auto* invert = app.add_subcommand("invert", "assemble the forward matrix and invert");
  invert->fallthrough();
  int inv_grid = 24, inv_points = 64, inv_angles = 63;
  double inv_mu = -1.0;
  std::string truth_spec;
  invert->add_option("--grid", inv_grid, "pixel cells per side")
      ->check(CLI::PositiveNumber);
  invert->add_option("--points", inv_points, "fan points")->check(CLI::PositiveNumber);
  invert->add_option("--angles", inv_angles, "fan angles")->check(CLI::PositiveNumber);
  invert->add_option("--mu", inv_mu, "regularization weight; default scales with sigma_max^2");
  invert->add_option("--f", truth_spec, "ground-truth field for an inverse-crime run");

  auto* lens = app.add_subcommand("lens", "travel-time linearization residual");
  lens->set_help_flag("--help", "print usage");  // frees -h for the --h option
  lens->fallthrough();
  std::string h_spec = "gaussian{a=0.2,w=0.5}";
  double l_entry_s = 0.0, l_theta = 0.0, l_sfd = 1e-3;
  lens->add_option("--h", h_spec, "conformal perturbation profile");
  lens->add_option("--entry-s", l_entry_s, "entry arclength")->required();
  lens->add_option("--theta", l_theta, "launch fiber angle")->required();
  lens->add_option("--s-fd", l_sfd, "finite difference step in s");

  std::vector<const char*> argv;
  argv.push_back("brl");
  for (const std::string& a : args) argv.push_back(a.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n";
    return 2;
  }

  try {
    const Scenario scenario = load_scenario(g.scenario_path);
    if (g.threads < 1) throw SchemaError("--threads must be at least 1");
    set_thread_count(static_cast<std::size_t>(g.threads));
    log_line("scenario " + scenario.hash() + ", " + scenario.canonical());

    RunOutput out;
    std::string sub;
    if (geom->parsed()) {
      sub = "geom";
      out = run_geom(scenario);
    } else if (validate->parsed()) {
      sub = "validate";
      out = run_validate(scenario, validate_rays);
    } else if (trace->parsed()) {
      sub = "trace";
      out = run_trace(scenario, entry_s, theta, want_csv);
    } else if (jacobi->parsed()) {
      sub = "jacobi";
      out = run_jacobi(scenario, j_entry_s, j_theta, j_dx1, j_dx2, j_dtheta, j_csv);
    } else if (brt->parsed()) {
      sub = "brt";
      out = run_brt(scenario, field_spec, brt_points, brt_angles);
    } else if (pestov->parsed()) {
      sub = "pestov";
      out = run_pestov(scenario, u_spec, p_cells, p_theta, p_bdry);
    } else if (invert->parsed()) {
      sub = "invert";
      out = run_invert(scenario, inv_grid, inv_points, inv_angles, inv_mu,
                       truth_spec);
    } else if (lens->parsed()) {
      sub = "lens";
      out = run_lens(scenario, h_spec, l_entry_s, l_theta, l_sfd);
    } else {
      throw SchemaError("no subcommand selected");
    }

    std::filesystem::create_directories(g.out_dir);
    RunManifest manifest;
    manifest.tool_version = tool_version();
    manifest.subcommand = sub;
    manifest.scenario_hash = scenario.hash();
    manifest.scenario_canonical = scenario.canonical();
    manifest.seed = g.seed;
    manifest.threads = g.threads;
    manifest.summary = out.summary;
    for (const auto& [name, content] : out.files) {
      write_text_file(g.out_dir + "/" + name, content);
      manifest.outputs.push_back(name);
      log_line("wrote " + name);
    }
    write_text_file(g.out_dir + "/manifest.json",
                    dump_json(manifest_json(manifest)));
    return 0;
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const SchemaError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}

}  // namespace brl
