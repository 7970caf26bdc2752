#pragma once
#include <array>
#include <optional>
#include <string>
#include <vector>

#include "vp/domain.hpp"
#include "vp/initial_data.hpp"

namespace vp {

enum class RunMode { poisson_test, trajectory, velocity_lemma, decay_scan, picard, run };

std::string to_string(RunMode mode);
RunMode mode_from_string(const std::string& s);

// Fully resolved run configuration: parsed from a single JSON document,
// defaults materialized, validated. The manifest written next to every run's
// outputs is the JSON round-trip of this struct.
struct RunConfig {
  RunMode mode = RunMode::run;

  // domain
  std::string domain_kind = "ball";  // ball | ellipsoid | level-set
  Vec3 domain_center{};
  double ball_radius = 1.0;
  Vec3 semi_axes{1.0, 1.0, 1.0};
  std::vector<LevelSetTerm> level_set_terms;

  // grid
  int grid_cells = 48;        // across the longest bounding-box extent
  double grid_h = 0.0;        // overrides cells when > 0
  double solver_tol = 1e-10;

  // initial data
  std::string profile = "maxwellian-bump";  // zero | uniform-box | maxwellian-bump | ring-bump
  double amplitude = 1.0;
  Vec3 x_center{};
  double x_radius = 0.45;
  double v_thermal = 0.35;
  double v_max = 1.05;
  double v_ring = 0.5;
  double v_ring_width = 0.1;
  Vec3 x_box_lo{}, x_box_hi{}, v_box_lo{}, v_box_hi{};
  double flatness_delta = 0.0;  // 0 -> 0.02 * L
  long particles = 100000;
  uint64_t seed = 1;

  // time
  double T = 1.0;
  double dt = 1e-3;

  // run control
  std::string output_dir = "out";
  double q_ceiling = 0.0;  // 0 -> derived
  int workers = 1;
  bool dump_fields = false;

  // mode blocks
  std::vector<int> poisson_cells{16, 32, 64};
  Vec3 trajectory_x{0.5, 0.0, 0.0};
  Vec3 trajectory_v{0.0, 1.0, 0.0};
  std::vector<double> vl_depths{0.04, 0.02, 0.01, 0.005};
  double vl_tangential_speed = 1.0;
  int vl_reflections = 5;
  Vec3 scan_direction{1.0, 0.0, 0.0};
  double scan_d0 = 0.2;
  int scan_m_max = 6;
  bool scan_time_derivative = false;
  double charge_base = 1.0;    // rho = base + linear . (x - center) (+ t * linear_t . ...)
  Vec3 charge_linear{};
  Vec3 charge_linear_t{};
  int picard_n_max = 8;
  double picard_tol = 1e-3;

  std::vector<std::string> warnings;  // advisory findings from validation

  ConvexDomain make_domain() const;
  InitialData make_initial(const ConvexDomain& domain) const;

  static RunConfig from_json_file(const std::string& path);
  static RunConfig from_json_text(const std::string& text);
  std::string manifest_json() const;

  void validate();  // throws ConfigError; fills warnings
};

}  // namespace vp
