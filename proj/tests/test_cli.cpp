#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "vp/config.hpp"
#include "vp/errors.hpp"
#include "vp/runner.hpp"

using namespace vp;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / "vp_cli_tests" / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string first_line(const std::string& text) { return text.substr(0, text.find('\n')); }

int run_text(const std::string& json_text, const std::string& out_dir) {
  RunConfig c = RunConfig::from_json_text(json_text);
  c.output_dir = out_dir;
  return run_config(c);
}

}  // namespace

TEST_CASE("config validation catches bad input") {
  CHECK_THROWS_AS(RunConfig::from_json_text("{ not json"), ConfigError);
  CHECK_THROWS_AS(RunConfig::from_json_text(R"({"mode":"warp-drive"})"), ConfigError);
  CHECK_THROWS_AS(
      RunConfig::from_json_text(R"({"domain":{"kind":"ball","radius":-1.0}})"),
      ConfigError);
  CHECK_THROWS_AS(
      RunConfig::from_json_text(R"({"domain":{"kind":"cube"}})"),
      ConfigError);
  CHECK_THROWS_AS(RunConfig::from_json_text(R"({"time":{"dt":-0.1}})"), ConfigError);
  CHECK_THROWS_AS(RunConfig::from_json_text(R"({"grid":{"cells":4}})"), ConfigError);
  CHECK_THROWS_AS(RunConfig::from_json_text(R"({"initial":{"N":0}})"), ConfigError);

  // defaults materialize
  const RunConfig c = RunConfig::from_json_text("{}");
  CHECK(c.mode == RunMode::run);
  CHECK(c.grid_cells == 48);
  CHECK(c.workers == 1);
  CHECK(c.solver_tol == 1e-10);

  // CFL-style advisory surfaces as a warning, not an error
  const RunConfig w = RunConfig::from_json_text(
      R"({"time":{"T":1.0,"dt":0.5},"grid":{"cells":48}})");
  CHECK(!w.warnings.empty());
}

TEST_CASE("poisson-test mode writes the convergence table") {
  const fs::path dir = fresh_dir("poisson");
  const int rc = run_text(R"({
    "mode": "poisson-test",
    "domain": {"kind": "ball", "radius": 1.0},
    "poisson_test": {"cells": [16, 24]}
  })",
                          dir.string());
  CHECK(rc == kExitOk);
  CHECK(fs::exists(dir / "manifest.json"));
  const std::string csv = slurp(dir / "convergence.csv");
  CHECK(first_line(csv) == "charge,cells,h,linf_error,observed_order");
  // 2 charges x 2 grids + header
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 5);
}

TEST_CASE("trajectory mode emits the contracted column set") {
  const fs::path dir = fresh_dir("trajectory");
  const int rc = run_text(R"({
    "mode": "trajectory",
    "domain": {"kind": "ball", "radius": 1.0},
    "grid": {"cells": 24},
    "time": {"T": 0.05, "dt": 0.005},
    "trajectory": {"start_x": [0.5, 0, 0], "start_v": [0, 1, 0]}
  })",
                          dir.string());
  CHECK(rc == kExitOk);
  const std::string csv = slurp(dir / "trajectory.csv");
  CHECK(first_line(csv) == "s,X1,X2,X3,V1,V2,V3,xperp,vperp,alpha,reflections");
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 12);  // header + 11 samples
}

TEST_CASE("run mode: diagnostics columns, manifest echo, determinism") {
  const std::string cfg = R"({
    "mode": "run",
    "domain": {"kind": "ball", "radius": 1.0},
    "grid": {"cells": 24},
    "initial": {"profile": "maxwellian-bump", "x_radius": 0.45, "v_thermal": 0.35,
                 "v_max": 1.05, "N": 3000, "seed": 9},
    "time": {"T": 0.01, "dt": 0.0025}
  })";

  const fs::path dir1 = fresh_dir("run1");
  const fs::path dir2 = fresh_dir("run2");
  CHECK(run_text(cfg, dir1.string()) == kExitOk);
  CHECK(run_text(cfg, dir2.string()) == kExitOk);

  const std::string csv1 = slurp(dir1 / "diagnostics.csv");
  CHECK(first_line(csv1) ==
        "t,mass,kinetic_energy,field_energy,total_energy,Q,rho_max,rho_53,hopf_margin");
  // byte-identical outputs for identical config + seed + single worker
  CHECK(csv1 == slurp(dir2 / "diagnostics.csv"));

  const std::string manifest = slurp(dir1 / "manifest.json");
  CHECK(manifest.find("\"workers\": 1") != std::string::npos);
  CHECK(manifest.find("\"tol\": 1e-10") != std::string::npos);
  CHECK(fs::exists(dir1 / "run_summary.json"));
}

TEST_CASE("velocity-lemma, decay-scan and picard modes produce their artifacts") {
  {
    const fs::path dir = fresh_dir("vl");
    const int rc = run_text(R"({
      "mode": "velocity-lemma",
      "domain": {"kind": "ball", "radius": 1.0},
      "grid": {"cells": 24},
      "time": {"T": 1.0, "dt": 0.005},
      "velocity_lemma": {"depths": [0.02], "reflections": 2}
    })",
                            dir.string());
    CHECK(rc == kExitOk);
    const std::string csv = slurp(dir / "velocity_lemma.csv");
    CHECK(first_line(csv) == "x0_perp,alpha_ratio,ssd_ratio,reflections,band_exit,max_quotient");
  }
  {
    const fs::path dir = fresh_dir("scan");
    const int rc = run_text(R"({
      "mode": "decay-scan",
      "domain": {"kind": "ball", "radius": 1.0},
      "grid": {"cells": 32},
      "charge": {"base": 1.0, "linear": [0, 0.5, 0]},
      "decay_scan": {"direction": [1, 0, 0], "d0": 0.1, "m_max": 3}
    })",
                            dir.string());
    CHECK(rc == kExitOk);
    CHECK(slurp(dir / "decay_scan.csv").find("dphi_dtau1") != std::string::npos);
    CHECK(slurp(dir / "decay_fit.json").find("r_squared") != std::string::npos);
  }
  {
    const fs::path dir = fresh_dir("picard");
    const int rc = run_text(R"({
      "mode": "picard",
      "domain": {"kind": "ball", "radius": 1.0},
      "grid": {"cells": 24},
      "initial": {"profile": "maxwellian-bump", "x_radius": 0.45, "N": 1500, "seed": 4},
      "time": {"T": 0.02, "dt": 0.005},
      "picard": {"n_max": 2, "tol": 1e-3}
    })",
                            dir.string());
    CHECK(rc == kExitOk);
    const std::string summary = slurp(dir / "picard_summary.json");
    CHECK(summary.find("\"converged\"") != std::string::npos);
    CHECK(summary.find("\"q_curve\"") != std::string::npos);
    CHECK(fs::exists(dir / "iterate_1_diagnostics.csv"));
  }
}

TEST_CASE("non-ball domains run end to end") {
  {
    const fs::path dir = fresh_dir("ellipsoid");
    const int rc = run_text(R"({
      "mode": "velocity-lemma",
      "domain": {"kind": "ellipsoid", "semi_axes": [2, 1, 1]},
      "grid": {"cells": 32},
      "time": {"T": 1.0, "dt": 0.005},
      "velocity_lemma": {"depths": [0.01], "reflections": 2}
    })",
                            dir.string());
    CHECK(rc == kExitOk);
    CHECK(fs::exists(dir / "velocity_lemma.csv"));
  }
  {
    const fs::path dir = fresh_dir("levelset");
    const int rc = run_text(R"({
      "mode": "trajectory",
      "domain": {"kind": "level-set", "terms": [
        {"coef": 0.5, "powers": [4, 0, 0]},
        {"coef": 1.0, "powers": [0, 4, 0]},
        {"coef": 1.0, "powers": [0, 0, 4]}
      ]},
      "grid": {"cells": 24},
      "time": {"T": 0.05, "dt": 0.005},
      "trajectory": {"start_x": [0.4, 0.1, 0], "start_v": [0.3, 0.9, 0.1]}
    })",
                            dir.string());
    CHECK(rc == kExitOk);
    CHECK(fs::exists(dir / "trajectory.csv"));
  }
}

TEST_CASE("exit codes distinguish config, invariant and solver failures") {
  // missing file and malformed config map to the config exit code
  CHECK(run_config_file("/nonexistent/vp.json", "", "", 0, -1) == kExitConfig);

  const fs::path dir = fresh_dir("codes");
  const fs::path bad = dir / "bad.json";
  std::ofstream(bad) << "{\"domain\":{\"kind\":\"ball\",\"radius\":-2}}";
  CHECK(run_config_file(bad.string(), "", "", 0, -1) == kExitConfig);

  // a grid that cannot resolve the domain is a solver-class failure
  const fs::path coarse = dir / "coarse.json";
  std::ofstream(coarse) << R"({
    "mode": "trajectory",
    "domain": {"kind": "ball", "radius": 1.0},
    "grid": {"h": 0.5},
    "time": {"T": 0.01, "dt": 0.005}
  })";
  CHECK(run_config_file(coarse.string(), "", "", 0, -1) == kExitSolver);

  // a decay ladder starting outside the tubular neighborhood as well
  const fs::path ladder = dir / "ladder.json";
  std::ofstream(ladder) << R"({
    "mode": "decay-scan",
    "domain": {"kind": "ball", "radius": 1.0},
    "grid": {"cells": 24},
    "decay_scan": {"d0": 0.9, "m_max": 2}
  })";
  CHECK(run_config_file(ladder.string(), "", "", 0, -1) == kExitSolver);

  // poisson-test is defined against the analytic ball solutions
  const fs::path wrongdom = dir / "wrongdom.json";
  std::ofstream(wrongdom) << R"({
    "mode": "poisson-test",
    "domain": {"kind": "ellipsoid", "semi_axes": [2, 1, 1]}
  })";
  CHECK(run_config_file(wrongdom.string(), "", "", 0, -1) == kExitConfig);

  // mode override wins over the config's own mode
  const fs::path ok = dir / "ok.json";
  std::ofstream(ok) << R"({
    "mode": "run",
    "domain": {"kind": "ball", "radius": 1.0},
    "grid": {"cells": 16},
    "poisson_test": {"cells": [16]},
    "output_dir": ")" << (dir / "override_out").string() << R"("
  })";
  CHECK(run_config_file(ok.string(), "poisson-test", "", 0, -1) == kExitOk);
  CHECK(fs::exists(dir / "override_out" / "convergence.csv"));
}
