// msflow command line: `run` executes a configured simulation and writes
// snapshots + diagnostics + manifest; `verify` runs the pinned property
// suites; `diagnose` recomputes diagnostic series from a finished run.
//
// Exit codes: 0 success, 2 Newton divergence during `run`, 3 configuration
// error (bad config file, unknown model/suite), 4 missing snapshots in
// `diagnose`. All errors are also printed as single-line JSON on stderr.
#include "msflow/cli_app.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>

#include "msflow/io.hpp"
#include "msflow/run.hpp"
#include "msflow/verify.hpp"

namespace msflow::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct MissingSnapshots : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void print_error(const std::string& kind, const std::string& message, int step = -1) {
  ordered_json j;
  j["error"] = kind;
  if (step >= 0) j["step"] = step;
  j["message"] = message;
  std::cerr << j.dump() << "\n";
}

void reject_unknown_keys(const ordered_json& obj, const std::set<std::string>& allowed,
                         const std::string& context) {
  for (const auto& [key, value] : obj.items())
    if (!allowed.count(key))
      throw ConfigError("unknown key '" + key + "' in " + context);
}

template <typename T>
T require(const ordered_json& obj, const std::string& key, const std::string& context) {
  if (!obj.contains(key)) throw ConfigError("missing key '" + key + "' in " + context);
  try {
    return obj.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError("key '" + key + "' in " + context + " has the wrong type");
  }
}

template <typename T>
T optional(const ordered_json& obj, const std::string& key, const std::string& context,
           T fallback) {
  if (!obj.contains(key)) return fallback;
  try {
    return obj.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError("key '" + key + "' in " + context + " has the wrong type");
  }
}

struct RunConfig {
  epdiff::ChParams params;
  int n_steps = 0;
  integrator::BoxSchemeConfig scheme;
  grid::ArrayX<double> u0;
  double rho_amplitude = 0.0;
  bool with_rho = false;
  std::vector<std::string> diagnostics;
  double remap_threshold = 0.1;
  int snapshot_stride = 1;
  ordered_json raw;  // canonical echo for the manifest / content hash
};

RunConfig parse_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path.string());
  ordered_json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }

  reject_unknown_keys(
      j, {"model", "grid", "params", "init", "integrator", "diagnostics", "remap", "output"},
      "config");
  RunConfig cfg;
  cfg.raw = j;

  const auto model = require<std::string>(j, "model", "config");
  if (model != "ch") throw ConfigError("unknown model '" + model + "' (supported: ch)");

  const auto gj = require<ordered_json>(j, "grid", "config");
  reject_unknown_keys(gj, {"n_cells", "length", "dt", "n_steps"}, "grid");
  cfg.params.grid.n_cells = require<int>(gj, "n_cells", "grid");
  cfg.params.grid.length = require<double>(gj, "length", "grid");
  cfg.params.grid.dt = require<double>(gj, "dt", "grid");
  cfg.n_steps = require<int>(gj, "n_steps", "grid");
  if (cfg.n_steps < 1) throw ConfigError("grid.n_steps must be >= 1");

  const auto pj = require<ordered_json>(j, "params", "config");
  reject_unknown_keys(pj, {"lambda"}, "params");
  cfg.params.lambda = require<double>(pj, "lambda", "params");
  try {
    cfg.params.validate();
  } catch (const std::exception& e) {
    throw ConfigError(e.what());
  }

  const auto ij = require<ordered_json>(j, "init", "config");
  reject_unknown_keys(ij, {"type", "amplitude", "wavenumber", "center", "width", "rho_amplitude"},
                      "init");
  const auto type = require<std::string>(ij, "type", "init");
  const double L = cfg.params.grid.length;
  if (type == "zero") {
    cfg.u0 = grid::ArrayX<double>::Zero(cfg.params.grid.n_cells);
  } else if (type == "sine") {
    cfg.u0 = epdiff::initial_sine<double>(require<double>(ij, "amplitude", "init"),
                                          optional<int>(ij, "wavenumber", "init", 1),
                                          cfg.params.grid);
  } else if (type == "bump") {
    cfg.u0 = epdiff::initial_bump<double>(require<double>(ij, "amplitude", "init"),
                                          optional<double>(ij, "center", "init", 0.5 * L),
                                          require<double>(ij, "width", "init"), cfg.params.grid);
  } else if (type == "peakon") {
    cfg.u0 = epdiff::peakon_initial<double>(require<double>(ij, "amplitude", "init"),
                                            optional<double>(ij, "center", "init", 0.5 * L),
                                            cfg.params);
  } else {
    throw ConfigError("unknown init.type '" + type + "'");
  }
  cfg.rho_amplitude = optional<double>(ij, "rho_amplitude", "init", 0.0);
  cfg.with_rho = ij.contains("rho_amplitude");

  if (j.contains("integrator")) {
    const auto sj = j.at("integrator");
    reject_unknown_keys(sj, {"newton_tol", "newton_max_iter", "jacobian_mode"}, "integrator");
    cfg.scheme.newton_tol = optional<double>(sj, "newton_tol", "integrator", 1e-12);
    cfg.scheme.newton_max_iter = optional<int>(sj, "newton_max_iter", "integrator", 50);
    const auto mode = optional<std::string>(sj, "jacobian_mode", "integrator", "analytic");
    if (mode == "analytic")
      cfg.scheme.jacobian_mode = integrator::BoxSchemeConfig::JacobianMode::analytic;
    else if (mode == "finite-difference")
      cfg.scheme.jacobian_mode = integrator::BoxSchemeConfig::JacobianMode::finite_difference;
    else
      throw ConfigError("integrator.jacobian_mode must be 'analytic' or 'finite-difference'");
    try {
      cfg.scheme.validate();
    } catch (const std::exception& e) {
      throw ConfigError(e.what());
    }
  }

  if (j.contains("diagnostics")) {
    for (const auto& name : j.at("diagnostics")) {
      const auto s = name.get<std::string>();
      if (s == "circulation") cfg.with_rho = true;
      if (s != "energy" && s != "momentum" && s != "circulation" &&
          s.rfind("relabelling:", 0) != 0)
        throw ConfigError("unknown diagnostic '" + s + "'");
      if (s.rfind("relabelling:", 0) == 0) {
        try {
          diagnostics::make_xi(s.substr(12), L);  // validate the xi spec now
        } catch (const std::invalid_argument& e) {
          throw ConfigError(e.what());
        }
      }
      cfg.diagnostics.push_back(s);
    }
  }

  if (j.contains("remap")) {
    const auto rj = j.at("remap");
    reject_unknown_keys(rj, {"threshold"}, "remap");
    cfg.remap_threshold = optional<double>(rj, "threshold", "remap", 0.1);
  }
  if (j.contains("output")) {
    const auto oj = j.at("output");
    reject_unknown_keys(oj, {"snapshot_stride"}, "output");
    cfg.snapshot_stride = optional<int>(oj, "snapshot_stride", "output", 1);
    if (cfg.snapshot_stride < 1) throw ConfigError("output.snapshot_stride must be >= 1");
  }
  return cfg;
}

std::string sanitize(const std::string& name) {
  std::string out = name;
  for (char& c : out)
    if (c == ':') c = '_';
  return out;
}

double evaluate_diagnostic(const std::string& name, const epdiff::ChState<double>& s,
                           const epdiff::ChParams& p) {
  const double dx = p.grid.dx();
  if (name == "energy") {
    grid::ArrayX<double> zero = grid::ArrayX<double>::Zero(s.u.size());
    auto [density, flux] = diagnostics::energy_density_and_flux(s, zero, p);
    return grid::quadrature(density, dx);
  }
  if (name == "momentum")
    return grid::quadrature<double>(epdiff::momentum_map(s, p.grid), dx);
  if (name == "circulation") return diagnostics::circulation(s, p);
  if (name.rfind("relabelling:", 0) == 0) {
    const auto xi = diagnostics::make_xi(name.substr(12), p.grid.length);
    return diagnostics::relabelling_invariant<double>(s, p.grid, xi);
  }
  throw ConfigError("unknown diagnostic '" + name + "'");
}

int cmd_run(const fs::path& config_path, const fs::path& out_base) {
  RunConfig cfg;
  try {
    cfg = parse_config(config_path);
  } catch (const ConfigError& e) {
    print_error("ConfigError", e.what());
    return 3;
  }

  const std::string run_id = io::content_hash(cfg.raw.dump());
  const fs::path run_dir = out_base / run_id;
  fs::create_directories(run_dir / "snapshots");
  fs::create_directories(run_dir / "diag");

  const auto& p = cfg.params;
  grid::ArrayX<double> rho0;
  const grid::ArrayX<double>* rho_ptr = nullptr;
  if (cfg.with_rho) {
    const auto x = p.grid.nodes<double>();
    rho0 = 1.0 + cfg.rho_amplitude * (2.0 * std::numbers::pi / p.grid.length * x).sin();
    rho_ptr = &rho0;
  }
  auto state = epdiff::clebsch_init(cfg.u0, p, cfg.with_rho, rho_ptr);

  run::ChSimulation<double> sim(p, cfg.scheme);
  std::map<std::string, diagnostics::DiagnosticSeries> series;
  for (const auto& name : cfg.diagnostics) series[name].name = name;

  int snapshots_written = 0;
  int max_newton_iters = 0;
  auto snapshot_path = [&](int index) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%06d.csv", index);
    return run_dir / "snapshots" / buf;
  };

  run::RunOptions opts;
  opts.scheme = cfg.scheme;
  opts.n_steps = cfg.n_steps;
  opts.remap_threshold = cfg.remap_threshold;
  try {
    sim.run(state, opts, [&](int k, const run::StepRecord<double>& rec) {
      max_newton_iters = std::max(max_newton_iters, rec.newton_iterations);
      if (k % cfg.snapshot_stride == 0 || k == cfg.n_steps) {
        io::write_state_csv(snapshot_path(snapshots_written), rec.state, p.grid);
        ++snapshots_written;
      }
      const double t = k * p.grid.dt;
      for (auto& [name, ser] : series) ser.push(t, evaluate_diagnostic(name, rec.state, p));
    });
  } catch (const integrator::NewtonDivergence& e) {
    print_error("NewtonDivergence", e.what());
    return 2;
  } catch (const integrator::SingularJacobian& e) {
    print_error("SingularJacobian", e.what());
    return 2;
  }

  for (const auto& [name, ser] : series)
    io::write_series_csv(run_dir / "diag" / (sanitize(name) + ".csv"), ser);

  ordered_json manifest;
  manifest["run_id"] = run_id;
  manifest["content_hash"] = run_id;
  manifest["config"] = cfg.raw;
  manifest["n_snapshots"] = snapshots_written;
  manifest["snapshot_stride"] = cfg.snapshot_stride;
  manifest["seam_correction"] = sim.seam_correction();
  manifest["newton_max_iterations"] = max_newton_iters;
  manifest["remap_events"] = ordered_json::array();
  for (const auto& ev : sim.remap_events())
    manifest["remap_events"].push_back(
        {{"step", ev.step}, {"metric_before", ev.metric_before}, {"metric_after", ev.metric_after}});
  manifest["diagnostics_summary"] = ordered_json::object();
  for (const auto& [name, ser] : series)
    manifest["diagnostics_summary"][name] = {{"max_drift", ser.max_drift()}};
  io::write_json(run_dir / "manifest.json", manifest);

  std::cout << run_dir.string() << "\n";
  return 0;
}

int cmd_verify(const std::string& suite, const std::string& json_path) {
  std::vector<verify::CheckResult> checks;
  if (suite == "structure") {
    checks = verify::verify_structure();
  } else if (suite == "symplecticity") {
    checks = verify::verify_symplecticity();
  } else if (suite == "noether") {
    checks = verify::verify_noether();
    for (auto& c : verify::verify_vorticity_identity()) checks.push_back(c);
  } else if (suite == "euler") {
    checks = verify::verify_euler();
  } else if (suite == "convergence") {
    checks = verify::verify_convergence();
  } else {
    print_error("ConfigError", "unknown verify suite '" + suite + "'");
    return 3;
  }

  bool pass = true;
  for (const auto& c : checks) {
    std::printf("%-58s value=%-13.6g band=[%g, %g]  %s\n", c.name.c_str(), c.value, c.lo, c.hi,
                c.pass ? "PASS" : "FAIL");
    pass = pass && c.pass;
  }
  std::printf("suite %s: %s\n", suite.c_str(), pass ? "PASS" : "FAIL");

  if (!json_path.empty()) {
    ordered_json report;
    report["suite"] = suite;
    report["pass"] = pass;
    report["checks"] = ordered_json::array();
    for (const auto& c : checks)
      report["checks"].push_back(
          {{"name", c.name}, {"value", c.value}, {"lo", c.lo}, {"hi", c.hi}, {"pass", c.pass}});
    io::write_json(json_path, report);
  }
  return pass ? 0 : 1;
}

int cmd_diagnose(const fs::path& run_dir, const std::vector<std::string>& which) {
  const fs::path manifest_path = run_dir / "manifest.json";
  if (!fs::exists(manifest_path)) {
    print_error("MissingSnapshots", "no manifest.json in " + run_dir.string());
    return 4;
  }
  ordered_json manifest;
  {
    std::ifstream in(manifest_path);
    try {
      in >> manifest;
    } catch (const nlohmann::json::exception& e) {
      print_error("ConfigError", std::string("bad manifest: ") + e.what());
      return 3;
    }
  }

  epdiff::ChParams p;
  int stride = 1;
  try {
    const auto& gj = manifest.at("config").at("grid");
    p.grid.n_cells = gj.at("n_cells").get<int>();
    p.grid.length = gj.at("length").get<double>();
    p.grid.dt = gj.at("dt").get<double>();
    p.lambda = manifest.at("config").at("params").at("lambda").get<double>();
    stride = manifest.value("snapshot_stride", 1);
  } catch (const nlohmann::json::exception& e) {
    print_error("ConfigError", std::string("bad manifest: ") + e.what());
    return 3;
  }

  std::vector<fs::path> snaps;
  if (fs::exists(run_dir / "snapshots"))
    for (const auto& entry : fs::directory_iterator(run_dir / "snapshots"))
      if (entry.path().extension() == ".csv") snaps.push_back(entry.path());
  std::sort(snaps.begin(), snaps.end());
  if (snaps.empty()) {
    print_error("MissingSnapshots", "no snapshots in " + run_dir.string());
    return 4;
  }

  fs::create_directories(run_dir / "diag");
  ordered_json summary;
  try {
    for (const auto& name : which) {
      diagnostics::DiagnosticSeries ser;
      ser.name = name;
      for (std::size_t k = 0; k < snaps.size(); ++k) {
        const double t = double(k) * stride * p.grid.dt;
        const auto s = io::read_state_csv(snaps[k], p.grid, t);
        ser.push(t, evaluate_diagnostic(name, s, p));
      }
      io::write_series_csv(run_dir / "diag" / (sanitize(name) + ".csv"), ser);
      summary[name] = {{"max_drift", ser.max_drift()}};
    }
  } catch (const std::exception& e) {
    print_error("ConfigError", e.what());
    return 3;
  }
  io::write_json(run_dir / "diag" / "summary.json", summary);
  return 0;
}

}  // namespace

int run_cli(int argc, char** argv) {
  if (const char* threads = std::getenv("MSFLOW_THREADS")) {
    const int t = std::atoi(threads);
    if (t > 0) Eigen::setNbThreads(t);
  }

  CLI::App app{"msflow: structure-preserving inverse-map fluid solver"};
  app.require_subcommand(1);

  std::string config_path, out_dir = "out";
  auto* run_cmd = app.add_subcommand("run", "run a configured simulation");
  run_cmd->add_option("--config", config_path, "JSON config file")->required();
  run_cmd->add_option("--out", out_dir, "output base directory");

  std::string suite, json_path;
  auto* verify_cmd = app.add_subcommand("verify", "run a verification suite");
  verify_cmd->add_option("suite", suite,
                         "one of: structure, symplecticity, noether, euler, convergence")
      ->required();
  verify_cmd->add_option("--json", json_path, "write a JSON report here");

  std::string run_dir;
  std::vector<std::string> which;
  auto* diag_cmd = app.add_subcommand("diagnose", "recompute diagnostics from a finished run");
  diag_cmd->add_option("rundir", run_dir, "run directory (contains manifest.json)")->required();
  diag_cmd->add_option("--which", which, "diagnostic names")->required()->expected(-1);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (run_cmd->parsed()) return cmd_run(config_path, out_dir);
    if (verify_cmd->parsed()) return cmd_verify(suite, json_path);
    if (diag_cmd->parsed()) return cmd_diagnose(run_dir, which);
  } catch (const std::exception& e) {
    print_error("InternalError", e.what());
    return 1;
  }
  return 1;
}

}  // namespace msflow::cli
