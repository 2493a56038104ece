/// @file cli_tests.cpp
/// @brief Black-box tests of the msflow executable: exit codes, output
/// layout, manifest contents, and the diagnose round trip.
///
/// Usage: cli_tests <path-to-msflow-binary>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#ifndef _WIN32
#include <sys/wait.h>
#endif

namespace fs = std::filesystem;

namespace {

int g_checks = 0;
int g_failures = 0;

void check(bool ok, const std::string& what) {
  ++g_checks;
  if (!ok) ++g_failures;
  std::printf("%-70s %s\n", what.c_str(), ok ? "PASS" : "FAIL");
}

int exit_code(const std::string& cmd) {
  const int status = std::system(cmd.c_str());
#ifdef _WIN32
  return status;
#else
  if (status == -1) return -1;
  return WEXITSTATUS(status);
#endif
}

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& tag) {
    path = fs::temp_directory_path() / ("msflow_cli_" + tag);
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream out(p);
  out << text;
}

const char* kGoodConfig = R"({
  "model": "ch",
  "grid": {"n_cells": 64, "length": 6.283185307179586, "dt": 0.01, "n_steps": 10},
  "params": {"lambda": 1.0},
  "init": {"type": "sine", "amplitude": 0.2, "wavenumber": 1, "rho_amplitude": 0.3},
  "diagnostics": ["energy", "momentum", "circulation", "relabelling:sin:1"],
  "output": {"snapshot_stride": 4}
})";

const char* kZeroConfig = R"({
  "model": "ch",
  "grid": {"n_cells": 64, "length": 6.283185307179586, "dt": 0.01, "n_steps": 5},
  "params": {"lambda": 1.0},
  "init": {"type": "zero"},
  "diagnostics": ["energy", "momentum"]
})";

const char* kDivergentConfig = R"({
  "model": "ch",
  "grid": {"n_cells": 64, "length": 6.283185307179586, "dt": 10.0, "n_steps": 3},
  "params": {"lambda": 1.0},
  "init": {"type": "bump", "amplitude": 2.0, "width": 0.6},
  "integrator": {"newton_max_iter": 8}
})";

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    std::fprintf(stderr, "usage: cli_tests <path-to-msflow-binary>\n");
    return 2;
  }
  const std::string bin = argv[1];
  const std::string devnull = " 2> /dev/null";

  {  // full run: layout, manifest, diagnose round trip
    TempDir tmp("run");
    write_file(tmp.path / "config.json", kGoodConfig);
    const fs::path out = tmp.path / "out";
    const int rc = exit_code(bin + " run --config " + (tmp.path / "config.json").string() +
                             " --out " + out.string() + " > " +
                             (tmp.path / "stdout").string());
    check(rc == 0, "run with a valid config exits 0");

    // The run directory is the printed line and the only entry under out/.
    std::vector<fs::path> entries;
    for (const auto& e : fs::directory_iterator(out)) entries.push_back(e.path());
    check(entries.size() == 1, "one run directory per run id");
    const fs::path run_dir = entries.front();
    std::ifstream printed(tmp.path / "stdout");
    std::string line;
    std::getline(printed, line);
    check(line == run_dir.string(), "run prints the run directory");

    // Snapshots: stride 4 over 10 steps -> indices 0,4,8 plus the final step.
    check(fs::exists(run_dir / "snapshots" / "000000.csv"), "first snapshot exists");
    check(fs::exists(run_dir / "snapshots" / "000003.csv"), "final snapshot exists");
    check(!fs::exists(run_dir / "snapshots" / "000004.csv"), "no extra snapshots");

    // Diagnostic series files, with ':' sanitized.
    for (const char* f : {"energy.csv", "momentum.csv", "circulation.csv",
                          "relabelling_sin_1.csv"})
      check(fs::exists(run_dir / "diag" / f), std::string("diag series written: ") + f);

    std::ifstream mf(run_dir / "manifest.json");
    const auto manifest = nlohmann::json::parse(mf);
    check(manifest["run_id"] == run_dir.filename().string(),
          "manifest run_id matches the directory name");
    check(manifest["n_snapshots"] == 4, "manifest counts 4 snapshots");
    check(manifest["config"]["model"] == "ch", "manifest echoes the config");
    check(manifest["diagnostics_summary"].contains("energy"),
          "manifest summarizes diagnostics");
    check(manifest["diagnostics_summary"]["momentum"]["max_drift"].get<double>() <= 1e-12,
          "momentum drift is at round-off in the manifest");

    // diagnose: recompute two series from the snapshots.
    const int drc = exit_code(bin + " diagnose " + run_dir.string() +
                              " --which energy momentum > /dev/null");
    check(drc == 0, "diagnose on a finished run exits 0");
    check(fs::exists(run_dir / "diag" / "summary.json"), "diagnose writes summary.json");
    std::ifstream sf(run_dir / "diag" / "summary.json");
    const auto summary = nlohmann::json::parse(sf);
    check(summary.contains("energy") && summary.contains("momentum"),
          "summary covers the requested diagnostics");
  }

  {  // zero data: all diagnostics identically zero
    TempDir tmp("zero");
    write_file(tmp.path / "config.json", kZeroConfig);
    const int rc = exit_code(bin + " run --config " + (tmp.path / "config.json").string() +
                             " --out " + (tmp.path / "out").string() + " > /dev/null");
    check(rc == 0, "zero-data run exits 0");
    for (const auto& e : fs::directory_iterator(tmp.path / "out")) {
      std::ifstream mf(e.path() / "manifest.json");
      const auto manifest = nlohmann::json::parse(mf);
      check(manifest["diagnostics_summary"]["energy"]["max_drift"].get<double>() == 0.0,
            "zero data: energy drift exactly 0");
      check(manifest["newton_max_iterations"].get<int>() == 0,
            "zero data: Newton converges without iterating");
    }
  }

  {  // config errors -> exit 3
    TempDir tmp("cfg");
    const auto try_config = [&](const std::string& name, const std::string& text) {
      write_file(tmp.path / name, text);
      return exit_code(bin + " run --config " + (tmp.path / name).string() + " --out " +
                       (tmp.path / "out").string() + " > /dev/null" + devnull);
    };
    check(try_config("bad_model.json",
                     R"({"model":"euler","grid":{"n_cells":64,"length":6.28,"dt":0.01,"n_steps":1},"params":{"lambda":1},"init":{"type":"zero"}})") ==
              3,
          "unknown model exits 3");
    check(try_config("unknown_key.json",
                     R"({"model":"ch","grid":{"n_cells":64,"length":6.28,"dt":0.01,"n_steps":1},"params":{"lambda":1},"init":{"type":"zero"},"extra":1})") ==
              3,
          "unknown top-level key exits 3");
    check(try_config("unknown_grid_key.json",
                     R"({"model":"ch","grid":{"n_cells":64,"length":6.28,"dt":0.01,"n_steps":1,"cfl":0.5},"params":{"lambda":1},"init":{"type":"zero"}})") ==
              3,
          "unknown grid key exits 3");
    check(try_config("missing_key.json",
                     R"({"model":"ch","grid":{"n_cells":64,"length":6.28,"n_steps":1},"params":{"lambda":1},"init":{"type":"zero"}})") ==
              3,
          "missing grid.dt exits 3");
    check(try_config("bad_json.json", "{ not json") == 3, "malformed JSON exits 3");
    check(try_config("bad_lambda.json",
                     R"({"model":"ch","grid":{"n_cells":64,"length":6.28,"dt":0.01,"n_steps":1},"params":{"lambda":-1},"init":{"type":"zero"}})") ==
              3,
          "nonpositive lambda exits 3");
    check(try_config("bad_diag.json",
                     R"({"model":"ch","grid":{"n_cells":64,"length":6.28,"dt":0.01,"n_steps":1},"params":{"lambda":1},"init":{"type":"zero"},"diagnostics":["enstrophy"]})") ==
              3,
          "unknown diagnostic exits 3");
    check(try_config("bad_xi.json",
                     R"({"model":"ch","grid":{"n_cells":64,"length":6.28,"dt":0.01,"n_steps":1},"params":{"lambda":1},"init":{"type":"zero"},"diagnostics":["relabelling:exp:1"]})") ==
              3,
          "unknown relabelling function exits 3");
    check(try_config("bad_mode.json",
                     R"({"model":"ch","grid":{"n_cells":64,"length":6.28,"dt":0.01,"n_steps":1},"params":{"lambda":1},"init":{"type":"zero"},"integrator":{"jacobian_mode":"exact"}})") ==
              3,
          "unknown jacobian mode exits 3");
    check(exit_code(bin + " run --config " + (tmp.path / "nonexistent.json").string() +
                    " --out " + (tmp.path / "out").string() + " > /dev/null" + devnull) == 3,
          "missing config file exits 3");
  }

  {  // Newton divergence -> exit 2, JSON error on stderr
    TempDir tmp("div");
    write_file(tmp.path / "config.json", kDivergentConfig);
    const int rc = exit_code(bin + " run --config " + (tmp.path / "config.json").string() +
                             " --out " + (tmp.path / "out").string() + " > /dev/null 2> " +
                             (tmp.path / "stderr").string());
    check(rc == 2, "divergent run exits 2");
    std::ifstream err(tmp.path / "stderr");
    std::string line;
    std::getline(err, line);
    bool json_error = false;
    try {
      const auto j = nlohmann::json::parse(line);
      json_error = j["error"] == "NewtonDivergence";
    } catch (...) {
    }
    check(json_error, "divergence reported as single-line JSON on stderr");
  }

  {  // verify subcommand
    TempDir tmp("verify");
    check(exit_code(bin + " verify structure > /dev/null") == 0, "verify structure exits 0");
    check(exit_code(bin + " verify nonsense > /dev/null" + devnull) == 3,
          "unknown verify suite exits 3");
    const fs::path report = tmp.path / "report.json";
    check(exit_code(bin + " verify structure --json " + report.string() + " > /dev/null") == 0,
          "verify --json exits 0");
    std::ifstream rf(report);
    const auto j = nlohmann::json::parse(rf);
    check(j["suite"] == "structure" && j["pass"] == true && j["checks"].is_array(),
          "JSON report has suite, pass, checks");
  }

  {  // diagnose error paths
    TempDir tmp("diag");
    fs::create_directories(tmp.path / "empty_run");
    check(exit_code(bin + " diagnose " + (tmp.path / "empty_run").string() +
                    " --which energy > /dev/null" + devnull) == 4,
          "diagnose without manifest exits 4");

    // Manifest present but snapshots missing.
    fs::create_directories(tmp.path / "husk");
    write_file(tmp.path / "husk" / "manifest.json",
               R"({"config":{"grid":{"n_cells":64,"length":6.28,"dt":0.01},"params":{"lambda":1.0}},"snapshot_stride":1})");
    check(exit_code(bin + " diagnose " + (tmp.path / "husk").string() +
                    " --which energy > /dev/null" + devnull) == 4,
          "diagnose without snapshots exits 4");
  }

  std::printf("== %d checks, %d failed ==\n", g_checks, g_failures);
  return g_failures == 0 ? 0 : 1;
}
