#include "glmeissner/app.hpp"

#include <chrono>
#include <cmath>
#include <cstdlib>

#include "CLI11.hpp"

#include "glmeissner/error.hpp"
#include "glmeissner/io.hpp"
#include "glmeissner/normstar.hpp"
#include "glmeissner/parallel.hpp"

namespace glmeissner {

using nlohmann::ordered_json;

namespace {

const char* kVersion = "1.0.0";

std::string out_path(const RunConfig& cfg, const std::string& file) { return cfg.output_dir + "/" + file; }

MeshPtr make_mesh(const RunConfig& cfg) { return build_mesh(cfg.domain, cfg.spacing, cfg.pad); }

bool is_uniform_ball(const RunConfig& cfg) {
  return std::holds_alternative<Ball>(cfg.domain) && cfg.applied.uniform_z;
}

std::shared_ptr<const MeissnerData> solve_meissner(const RunConfig& cfg, const MeshPtr& mesh, bool need_lattice,
                                                   bool need_continuum) {
  LondonOptions o = cfg.london;
  if (need_lattice) o.lattice = true;
  if (need_continuum) o.continuum = true;
  return std::make_shared<MeissnerData>(solve_london(mesh, cfg.applied.function(), o));
}

ordered_json meissner_json(const MeissnerData& md) {
  ordered_json j;
  j["J0"] = json_number(md.J0);
  j["J0_full_space"] = json_number(md.J0_full_space);
  j["applied_norm"] = json_number(md.applied_norm);
  j["continuum"] = md.has_continuum;
  j["iterations"] = md.iterations;
  j["outer_iterations"] = md.outer_iterations;
  j["outer_change"] = json_number(md.outer_change);
  j["residual"] = json_number(md.residual_norm);
  j["div_max"] = json_number(md.div_max);
  j["div_l2"] = json_number(md.div_l2);
  j["tangential_max"] = json_number(md.tangential_max);
  if (md.has_lattice) {
    j["lattice"] = {{"J0", json_number(md.lattice.J0)},
                    {"kinetic", json_number(md.lattice.kinetic)},
                    {"field", json_number(md.lattice.field)},
                    {"iterations", md.lattice.iterations},
                    {"residual", json_number(md.lattice.residual)}};
  }
  return j;
}

CurveCurrent ball_diameter(double R) {
  CurveCurrent c;
  c.vertices = {Vec3(0, 0, -R), Vec3(0, 0, R)};
  c.endpoints_on_boundary = true;
  return c;
}

void write_state_vtk(const std::string& path, const GLState& s) {
  const Index n = s.mesh->grid().size();
  NodeScalar mod{"abs_u", std::vector<double>(size_t(n))}, ph{"arg_u", std::vector<double>(size_t(n))};
  for (Index i = 0; i < n; ++i) {
    mod.values[size_t(i)] = std::abs(s.u[i]);
    ph.values[size_t(i)] = std::arg(s.u[i]);
  }
  const VectorField H = to_nodes(curl(s.A));
  write_vtk_grid(path, s.mesh->grid(), {mod, ph}, {{"curl_A", &H}});
}

struct StateSummary {
  ordered_json json;
  bool vortexless = false;
};

StateSummary describe_state(const GLState& s, double hodge_tol) {
  StateSummary out;
  ordered_json& j = out.json;
  const EnergyReport r = gl_total_energy(s);
  j["energy"] = energy_json(r);
  const double direct = gl_direct_energy(s);
  j["direct_energy"] = json_number(direct);
  j["splitting_residual"] = json_number(std::abs(r.total - direct));
  j["min_abs_u"] = json_number(min_abs_u(s));
  j["R0_bound"] = json_number(r0_bound(s));
  j["coulomb_defect"] = json_number(coulomb_defect(s));
  try {
    const VorticityField v = vorticity(s);
    out.vortexless = v.vortexless() && min_abs_u(s) >= 0.5;
    j["vortexless"] = out.vortexless;
    j["vortex_faces"] = v.vortex_faces().size();
    j["vortex_mass"] = json_number(vortex_mass(v));
    j["closedness_defect"] = json_number(v.closedness_defect());
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kZeroOnPlaquette) throw;
    j["vortexless"] = false;
    j["vorticity_error"] = e.what();
  }
  try {
    const VorticityBoundReport b = check_vorticity_bound(s, vorticity_test_fields(s.mesh->shape()));
    j["vorticity_bound"] = {{"applicable", true}, {"max_ratio", json_number(b.max_ratio)}};
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kVortexPresent) throw;
    j["vorticity_bound"] = {{"applicable", false}, {"reason", e.what()}};
  }
  const HodgeResult hd = hodge_decompose(s.A, hodge_tol);
  j["hodge"] = {{"residual", json_number(hd.residual)},
                {"orthogonality", json_number(hd.orthogonality)},
                {"div_max", json_number(hd.div_max)}};
  return out;
}

void write_vortex_csv(const RunConfig& cfg, const GLState& s) {
  try {
    write_vortex_faces_csv(out_path(cfg, "vortex_faces.csv"), vorticity(s));
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kZeroOnPlaquette) throw;
    CsvWriter(out_path(cfg, "vortex_faces.csv"), {"x", "y", "z", "orientation", "turns"});
  }
}

GLState initial_state(const RunConfig& cfg, const MeshPtr& mesh, std::shared_ptr<const MeissnerData> md,
                      double hex, ordered_json& info) {
  GLState s = meissner_state(mesh, md, cfg.eps, hex);
  info["start"] = cfg.start;
  if (cfg.start == "perturbed") {
    s = perturbed_state(s, cfg.perturbation, cfg.seed);
  } else if (cfg.start == "seeded") {
    CurveCurrent curve;
    if (cfg.curve) {
      curve = *cfg.curve;
    } else {
      curve = seeding_curve(mesh, *md, cfg.curve_spacing, cfg.tolerances.normstar).curve;
    }
    curve = offset_curve(*mesh, curve);
    const double core = cfg.core_radius > 0 ? cfg.core_radius : std::max(cfg.eps, 2.0 * mesh->spacing());
    s.u = seed_vortex(mesh, curve, core);
    info["core_radius"] = core;
    info["curve_vertices"] = curve.vertices.size();
    write_curve_csv(out_path(cfg, "seed_curve.csv"), curve);
    write_vtk_curves(out_path(cfg, "seed_curve.vtk"), {curve});
  }
  return s;
}

// ---------------------------------------------------------------- commands

ordered_json cmd_london(const RunConfig& cfg, ordered_json& results) {
  const MeshPtr mesh = make_mesh(cfg);
  const auto md = solve_meissner(cfg, mesh, false, false);
  results["meissner"] = meissner_json(*md);
  ordered_json summary = {{"J0", json_number(md->J0)}, {"J0_full_space", json_number(md->J0_full_space)}};

  const Grid& g = mesh->grid();
  const bool exact = is_uniform_ball(cfg) && md->has_continuum;
  const double R = exact ? std::get<Ball>(cfg.domain).radius : 0.0;
  if (exact) {
    double e2 = 0.0, b2 = 0.0;
    for (Index i : mesh->interior_nodes()) {
      const Vec3 ref = analytic_ball_B0(R, g.position(i));
      const double w = mesh->node_weight(i);
      e2 += w * (md->applied_norm * md->B0.at(i) - ref).squaredNorm();
      b2 += w * ref.squaredNorm();
    }
    const double err = std::sqrt(e2 / b2);
    results["closed_form"] = {{"relative_l2_error", err},
                              {"J0_exact_normalized", ball_J0_exact(R) / (md->applied_norm * md->applied_norm)}};
    summary["relative_l2_error"] = err;
  }
  if (md->has_continuum) {
    std::vector<std::string> head = {"axis", "t", "x", "y", "z", "Bx", "By", "Bz"};
    if (exact) head.insert(head.end(), {"Bx_exact", "By_exact", "Bz_exact"});
    CsvWriter csv(out_path(cfg, "b0_axes.csv"), head);
    const Vec3 ext = half_extent(cfg.domain);
    for (int a = 0; a < 3; ++a) {
      const int steps = 40;
      for (int k = 0; k <= steps; ++k) {
        const double t = -ext[a] + 2.0 * ext[a] * k / steps;
        const Vec3 p = t * Vec3::Unit(a);
        const Vec3 b = interpolate(md->B0, p);
        csv << std::string(1, char('x' + a)) << t << p[0] << p[1] << p[2] << b[0] << b[1] << b[2];
        if (exact) {
          const Vec3 e = analytic_ball_B0(R, p) / md->applied_norm;
          csv << e[0] << e[1] << e[2];
        }
        csv.end_row();
      }
    }
    write_vtk_grid(out_path(cfg, "b0.vtk"), g, {}, {{"B0", &md->B0}, {"H0ex", &md->H0ex}});
  }
  return summary;
}

ordered_json cmd_normstar(const RunConfig& cfg, ordered_json& results) {
  const MeshPtr mesh = make_mesh(cfg);
  RunConfig c = cfg;
  c.london.lattice = false;
  const auto md = solve_meissner(c, mesh, false, true);
  const NormStarResult ns = norm_star(mesh, md->B0, cfg.tolerances.normstar);
  results["meissner"] = meissner_json(*md);
  results["norm_star"] = {{"value", ns.value},
                          {"graph_value", ns.graph_value},
                          {"integral", ns.integral},
                          {"length", ns.length},
                          {"upper", ns.search.upper},
                          {"certified", ns.search.certified},
                          {"rounds", ns.search.rounds},
                          {"closed", ns.curve.closed},
                          {"vertices", ns.curve.vertices.size()}};
  const double hc1 = std::abs(std::log(cfg.eps)) / (2.0 * ns.value);
  results["hc1_leading"] = hc1;
  ordered_json summary = {{"norm_star", ns.value}, {"hc1_leading", hc1}};
  if (is_uniform_ball(cfg)) {
    const double R = std::get<Ball>(cfg.domain).radius;
    const double exact = ball_norm_star_exact(R) / md->applied_norm;
    const double hd = hausdorff_distance(ns.curve, ball_diameter(R), 0.25 * cfg.spacing);
    results["closed_form"] = {{"norm_star_normalized", exact},
                              {"relative_error", std::abs(ns.value - exact) / exact},
                              {"hausdorff_to_diameter", hd},
                              {"hausdorff_in_cells", hd / cfg.spacing}};
    summary["relative_error"] = std::abs(ns.value - exact) / exact;
    summary["hausdorff_to_diameter"] = hd;
  }
  write_curve_csv(out_path(cfg, "curve.csv"), ns.curve);
  write_vtk_curves(out_path(cfg, "curve.vtk"), {ns.curve});
  return summary;
}

ordered_json cmd_energy(const RunConfig& cfg, ordered_json& results) {
  const MeshPtr mesh = make_mesh(cfg);
  const auto md = solve_meissner(cfg, mesh, true, cfg.start == "seeded" && !cfg.curve && cfg.london.continuum);
  results["meissner"] = meissner_json(*md);
  ordered_json info;
  const GLState s = initial_state(cfg, mesh, md, cfg.hex, info);
  results["state"] = info;
  const StateSummary d = describe_state(s, cfg.tolerances.hodge);
  results["report"] = d.json;
  write_vortex_csv(cfg, s);
  write_state_vtk(out_path(cfg, "state.vtk"), s);
  return {{"total", d.json["energy"]["total"]},
          {"free_energy", d.json["energy"]["free_energy"]},
          {"vortexless", d.vortexless}};
}

ordered_json cmd_minimize(const RunConfig& cfg, ordered_json& results) {
  const MeshPtr mesh = make_mesh(cfg);
  if (cfg.start == "seeded" && mesh->spacing() > cfg.eps)
    throw Error(ErrorCode::kMeshTooCoarse, "spacing exceeds eps; vortex cores are not resolved");
  const auto md = solve_meissner(cfg, mesh, true, cfg.start == "seeded" && !cfg.curve && cfg.london.continuum);
  results["meissner"] = meissner_json(*md);
  ordered_json info;
  const GLState s0 = initial_state(cfg, mesh, md, cfg.hex, info);
  results["state"] = info;
  results["initial"] = describe_state(s0, cfg.tolerances.hodge).json;
  const MinimizeResult r = minimize(s0, cfg.minimize);
  const StateSummary fin = describe_state(r.state, cfg.tolerances.hodge);
  results["final"] = fin.json;
  results["minimize"] = {{"iterations", r.iterations},
                         {"evaluations", r.evaluations},
                         {"converged", r.converged},
                         {"monotone", r.monotone},
                         {"energy", r.energy},
                         {"grad_norm", r.grad_norm},
                         {"meissner_energy", cfg.hex * cfg.hex * md->J0}};
  CsvWriter trace(out_path(cfg, "trace.csv"), {"iter", "energy", "grad_norm", "step", "gauge_fixed"});
  for (const TraceRow& t : r.trace) {
    trace << t.iter << t.energy << t.grad_norm << t.step << (t.gauge_fixed ? 1 : 0);
    trace.end_row();
  }
  write_vortex_csv(cfg, r.state);
  write_state_vtk(out_path(cfg, "state.vtk"), r.state);
  return {{"energy", r.energy},
          {"meissner_energy", cfg.hex * cfg.hex * md->J0},
          {"iterations", r.iterations},
          {"converged", r.converged},
          {"vortexless", fin.vortexless},
          {"min_abs_u", fin.json["min_abs_u"]}};
}

ordered_json cmd_sweep(const RunConfig& cfg, ordered_json& results) {
  if (cfg.hex_list.empty()) throw Error(ErrorCode::kValidationError, "hex_list: sweep needs at least one value");
  if (cfg.spacing > cfg.eps)
    throw Error(ErrorCode::kMeshTooCoarse, "spacing " + format_number(cfg.spacing) + " exceeds eps " +
                                               format_number(cfg.eps) + "; vortex cores are not resolved");
  const MeshPtr mesh = make_mesh(cfg);
  const auto md = solve_meissner(cfg, mesh, true, false);
  results["meissner"] = meissner_json(*md);
  SweepOptions so;
  so.minimize = cfg.minimize;
  if (cfg.curve) so.curve = *cfg.curve;
  so.curve_spacing = cfg.curve_spacing;
  so.core_radius = cfg.core_radius;
  const SweepResult r = hc1_sweep(mesh, md, cfg.eps, cfg.hex_list, so);

  CsvWriter csv(out_path(cfg, "sweep.csv"),
                {"hex", "start", "total_energy", "free_energy", "meissner_energy", "vortex_mass", "min_abs_u",
                 "vortexless", "converged", "iterations", "grad_norm", "winner"});
  ordered_json rows = ordered_json::array();
  for (const SweepRow& row : r.rows) {
    for (int b = 0; b < 2; ++b) {
      const BranchOutcome& o = b == 0 ? row.meissner : row.seeded;
      const bool winner = (b == 1) == row.seeded_wins;
      csv << row.hex << (b == 0 ? "meissner" : "seeded") << o.total << o.free_energy << row.meissner_energy
          << o.vortex_mass << o.min_abs_u << (o.vortexless ? 1 : 0) << (o.converged ? 1 : 0) << o.iterations
          << o.grad_norm << (winner ? 1 : 0);
      csv.end_row();
    }
    rows.push_back({{"hex", row.hex},
                    {"total_energy", json_number(row.total_energy)},
                    {"meissner_energy", json_number(row.meissner_energy)},
                    {"vortex_mass", json_number(row.vortex_mass)},
                    {"min_abs_u", json_number(row.min_abs_u)},
                    {"vortexless", row.vortexless},
                    {"seeded_wins", row.seeded_wins}});
  }
  results["rows"] = rows;
  const double ratio = r.crossed && r.hc1_leading > 0 ? r.hc1_numeric / r.hc1_leading : NAN;
  results["hc1_numeric_bracket"] = r.crossed ? ordered_json{r.bracket_low, r.bracket_high} : ordered_json(nullptr);
  results["hc1_numeric"] = r.crossed ? json_number(r.hc1_numeric) : ordered_json(nullptr);
  results["hc1_leading"] = json_number(r.hc1_leading);
  results["norm_star"] = json_number(r.norm_star);
  results["ratio"] = json_number(ratio);
  results["monotone"] = r.monotone;
  write_curve_csv(out_path(cfg, "seed_curve.csv"), r.curve);
  write_vtk_curves(out_path(cfg, "seed_curve.vtk"), {r.curve});
  return {{"hc1_numeric", results["hc1_numeric"]},
          {"hc1_numeric_bracket", results["hc1_numeric_bracket"]},
          {"hc1_leading", results["hc1_leading"]},
          {"ratio", results["ratio"]},
          {"monotone", r.monotone}};
}

ordered_json cmd_splitcheck(const RunConfig& cfg, ordered_json& results) {
  std::vector<double> hs = cfg.splitcheck.spacings;
  if (hs.empty()) hs = {cfg.spacing, cfg.spacing / 2, cfg.spacing / 4};
  const Shape shape = cfg.domain;
  CsvWriter csv(out_path(cfg, "splitcheck.csv"), {"spacing", "pad", "total", "direct", "residual", "J0"});
  std::vector<double> res;
  ordered_json rows = ordered_json::array();
  for (double h : hs) {
    const int pad = std::max(1, int(std::ceil(cfg.splitcheck.pad_length / h - 1e-9)));
    const MeshPtr mesh = build_mesh(shape, h, pad);
    LondonOptions lo = cfg.london;
    lo.continuum = false;
    lo.lattice = true;
    const auto md = std::make_shared<MeissnerData>(solve_london(mesh, cfg.applied.function(), lo));
    GLState s = meissner_state(mesh, md, cfg.eps, cfg.splitcheck.hex);
    s.u = sample_complex(mesh, [&](const Vec3& p) { return splitcheck_u(shape, p); });
    s.A = sample_field(mesh, Storage::kEdge, [&](const Vec3& p) { return splitcheck_A(shape, p); });
    const double total = gl_total_energy(s).total;
    const double direct = gl_direct_energy(s);
    const double r = std::abs(total - direct);
    res.push_back(r);
    csv << h << pad << total << direct << r << md->J0;
    csv.end_row();
    rows.push_back({{"spacing", h}, {"pad", pad}, {"total", total}, {"direct", direct}, {"residual", r}});
  }
  // Least-squares slope of log residual against log spacing.
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = double(hs.size());
  for (size_t k = 0; k < hs.size(); ++k) {
    const double x = std::log(hs[k]), y = std::log(res[k]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  bool decreasing = true;
  for (size_t k = 1; k < res.size(); ++k) decreasing = decreasing && res[k] < res[k - 1];
  results["rows"] = rows;
  results["slope"] = json_number(slope);
  results["decreasing"] = decreasing;
  return {{"residuals", res}, {"slope", json_number(slope)}, {"decreasing", decreasing}};
}

ordered_json cmd_oracle(const RunConfig& cfg, ordered_json& results) {
  const Ball* ball = std::get_if<Ball>(&cfg.domain);
  if (!ball) throw Error(ErrorCode::kValidationError, "domain: oracle values exist for the ball only");
  const double R = ball->radius;
  const double ns = ball_norm_star_exact(R);
  const double hc1 = hc1_leading(cfg.eps, ns);
  const double norm = std::sqrt(4.0 * M_PI * R * R * R / 3.0);
  const double halfdisc = norm_star_halfdisc(R);
  results["radius"] = R;
  results["eps"] = cfg.eps;
  results["unit_field"] = {{"norm_star", ns},
                           {"hc1_leading", hc1},
                           {"J0", ball_J0_exact(R)},
                           {"kappa", ball_kappa(R)},
                           {"norm_star_halfdisc", halfdisc}};
  results["normalized_field"] = {{"applied_norm", norm},
                                 {"norm_star", ns / norm},
                                 {"hc1_leading", hc1_leading(cfg.eps, ns / norm)},
                                 {"J0", ball_J0_exact(R) / (norm * norm)}};
  CsvWriter csv(out_path(cfg, "b0_samples.csv"), {"x", "y", "z", "Bx", "By", "Bz", "curlB_x", "curlB_y", "curlB_z"});
  const int steps = 20;
  for (int a = 0; a < 3; a += 2)
    for (int k = 0; k <= steps; ++k) {
      const Vec3 p = (-R + 2.0 * R * k / steps) * Vec3::Unit(a);
      const Vec3 b = analytic_ball_B0(R, p), c = ball_curl_b0(R, p);
      csv << p[0] << p[1] << p[2] << b[0] << b[1] << b[2] << c[0] << c[1] << c[2];
      csv.end_row();
    }
  return {{"norm_star", ns}, {"hc1_leading", hc1}, {"norm_star_halfdisc", halfdisc}};
}

using Command = ordered_json (*)(const RunConfig&, ordered_json&);

Command find_command(const std::string& name) {
  if (name == "london") return cmd_london;
  if (name == "normstar") return cmd_normstar;
  if (name == "energy") return cmd_energy;
  if (name == "minimize") return cmd_minimize;
  if (name == "sweep") return cmd_sweep;
  if (name == "splitcheck") return cmd_splitcheck;
  if (name == "oracle") return cmd_oracle;
  return nullptr;
}

}  // namespace

Complex splitcheck_u(const Shape& shape, const Vec3& p) {
  const Vec3 q = p / half_extent(shape).maxCoeff();
  return (1.0 + 0.2 * q[0] * q[1]) * std::polar(1.0, 0.5 * q[0] + 0.3 * q[2] * q[2]);
}

Vec3 splitcheck_A(const Shape& shape, const Vec3& p) {
  const Vec3 q = p / half_extent(shape).maxCoeff();
  return Vec3(-0.3 * q[1] + 0.1 * q[2] * q[2], 0.3 * q[0], 0.2 * std::sin(q[0]));
}

const std::vector<std::string>& subcommand_names() {
  static const std::vector<std::string> names = {"london",   "normstar",   "energy", "minimize",
                                                 "sweep",    "splitcheck", "oracle"};
  return names;
}

ordered_json run_subcommand(const std::string& name, const RunConfig& cfg) {
  const Command cmd = find_command(name);
  if (!cmd) throw Error(ErrorCode::kValidationError, "unknown subcommand '" + name + "'");
  ensure_directory(cfg.output_dir);
  ordered_json manifest;
  manifest["program"] = "glmeissner";
  manifest["version"] = kVersion;
  manifest["subcommand"] = name;
  manifest["config"] = config_to_json(cfg);
  write_json(out_path(cfg, "manifest.json"), manifest);

  ordered_json results;
  results["subcommand"] = name;
  ordered_json summary = cmd(cfg, results);
  write_json(out_path(cfg, "results.json"), results);
  ordered_json line;
  line["subcommand"] = name;
  line["status"] = "ok";
  for (auto& [k, v] : summary.items()) line[k] = v;
  line["output_dir"] = cfg.output_dir;
  return line;
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  std::string sub, config_path, output;
  int threads = 0;
  CLI::App app{"Ginzburg-Landau Meissner state and first critical field solver", "glmeissner"};
  app.add_option("subcommand", sub, "london | normstar | energy | minimize | sweep | splitcheck | oracle")
      ->required();
  app.add_option("--config", config_path, "JSON run configuration")->required();
  app.add_option("--output", output, "output directory (overrides output_dir)");
  app.add_option("--threads", threads, "worker threads (default: GLMEISSNER_THREADS, else all)")
      ->check(CLI::PositiveNumber);

  auto fail = [&](int code, const std::string& kind, const std::string& msg) {
    ordered_json j = {{"subcommand", sub}, {"status", "error"}, {"error", kind}, {"message", msg}};
    out << j.dump() << std::endl;
    err << "glmeissner: " << msg << std::endl;
    return code;
  };

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help() << std::flush;
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    return fail(kExitValidation, "UsageError", e.what());
  }
  if (!find_command(sub)) return fail(kExitValidation, "UsageError", "unknown subcommand '" + sub + "'");

  if (threads == 0) {
    if (const char* env = std::getenv("GLMEISSNER_THREADS")) {
      char* end = nullptr;
      const long v = std::strtol(env, &end, 10);
      if (end == env || *end != '\0' || v < 1)
        return fail(kExitValidation, "UsageError", "GLMEISSNER_THREADS must be a positive integer");
      threads = int(v);
    }
  }
  if (threads > 0) set_num_threads(threads);

  try {
    RunConfig cfg = load_config(config_path);
    if (!output.empty()) cfg.output_dir = output;
    const auto t0 = std::chrono::steady_clock::now();
    const ordered_json line = run_subcommand(sub, cfg);
    out << line.dump() << std::endl;
    err << "glmeissner " << sub << ": done in "
        << std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count() << " s" << std::endl;
    return kExitOk;
  } catch (const Error& e) {
    return fail(e.is_validation() ? kExitValidation : kExitSolver, error_code_name(e.code()), e.what());
  } catch (const std::bad_alloc&) {
    return fail(kExitSolver, "OutOfMemory", "allocation failed");
  } catch (const std::exception& e) {
    return fail(kExitSolver, "InternalError", e.what());
  }
}

}  // namespace glmeissner
