#include "vp/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "vp/errors.hpp"

namespace vp {

using nlohmann::json;

std::string to_string(RunMode mode) {
  switch (mode) {
    case RunMode::poisson_test: return "poisson-test";
    case RunMode::trajectory: return "trajectory";
    case RunMode::velocity_lemma: return "velocity-lemma";
    case RunMode::decay_scan: return "decay-scan";
    case RunMode::picard: return "picard";
    case RunMode::run: return "run";
  }
  return "run";
}

RunMode mode_from_string(const std::string& s) {
  if (s == "poisson-test") return RunMode::poisson_test;
  if (s == "trajectory") return RunMode::trajectory;
  if (s == "velocity-lemma") return RunMode::velocity_lemma;
  if (s == "decay-scan") return RunMode::decay_scan;
  if (s == "picard") return RunMode::picard;
  if (s == "run") return RunMode::run;
  throw ConfigError("unknown mode '" + s + "'");
}

namespace {

Vec3 vec_of(const json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 3)
    throw ConfigError(where + ": expected an array of 3 numbers");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

template <typename T>
T get_or(const json& j, const std::string& key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError("field '" + key + "': " + e.what());
  }
}

Vec3 vec_or(const json& j, const std::string& key, const Vec3& fallback) {
  if (!j.contains(key)) return fallback;
  return vec_of(j.at(key), key);
}

}  // namespace

RunConfig RunConfig::from_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json_text(ss.str());
}

RunConfig RunConfig::from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }

  RunConfig c;
  c.mode = mode_from_string(get_or<std::string>(j, "mode", "run"));

  if (j.contains("domain")) {
    const json& d = j.at("domain");
    c.domain_kind = get_or<std::string>(d, "kind", "ball");
    c.domain_center = vec_or(d, "center", Vec3{});
    c.ball_radius = get_or<double>(d, "radius", 1.0);
    c.semi_axes = vec_or(d, "semi_axes", Vec3{1.0, 1.0, 1.0});
    if (d.contains("terms")) {
      for (const auto& t : d.at("terms")) {
        LevelSetTerm term;
        term.coef = get_or<double>(t, "coef", 1.0);
        if (!t.contains("powers") || !t.at("powers").is_array() || t.at("powers").size() != 3)
          throw ConfigError("domain.terms[].powers: expected an array of 3 integers");
        for (int a = 0; a < 3; ++a) term.powers[a] = t.at("powers")[a].get<int>();
        c.level_set_terms.push_back(term);
      }
    }
  }

  if (j.contains("grid")) {
    const json& g = j.at("grid");
    c.grid_cells = get_or<int>(g, "cells", 48);
    c.grid_h = get_or<double>(g, "h", 0.0);
    c.solver_tol = get_or<double>(g, "tol", 1e-10);
  }

  if (j.contains("initial")) {
    const json& i = j.at("initial");
    c.profile = get_or<std::string>(i, "profile", "maxwellian-bump");
    c.amplitude = get_or<double>(i, "amplitude", 1.0);
    c.x_center = vec_or(i, "x_center", Vec3{});
    c.x_radius = get_or<double>(i, "x_radius", 0.45);
    c.v_thermal = get_or<double>(i, "v_thermal", 0.35);
    c.v_max = get_or<double>(i, "v_max", 1.05);
    c.v_ring = get_or<double>(i, "v_ring", 0.5);
    c.v_ring_width = get_or<double>(i, "v_ring_width", 0.1);
    c.x_box_lo = vec_or(i, "x_box_lo", Vec3{});
    c.x_box_hi = vec_or(i, "x_box_hi", Vec3{});
    c.v_box_lo = vec_or(i, "v_box_lo", Vec3{});
    c.v_box_hi = vec_or(i, "v_box_hi", Vec3{});
    c.flatness_delta = get_or<double>(i, "flatness_delta", 0.0);
    c.particles = get_or<long>(i, "N", 100000L);
    c.seed = get_or<uint64_t>(i, "seed", 1ULL);
  }

  if (j.contains("time")) {
    const json& t = j.at("time");
    c.T = get_or<double>(t, "T", 1.0);
    c.dt = get_or<double>(t, "dt", 1e-3);
  }

  c.output_dir = get_or<std::string>(j, "output_dir", "out");
  c.q_ceiling = get_or<double>(j, "q_ceiling", 0.0);
  c.workers = get_or<int>(j, "workers", 1);
  c.dump_fields = get_or<bool>(j, "dump_fields", false);

  if (j.contains("poisson_test")) {
    const json& p = j.at("poisson_test");
    if (p.contains("cells")) c.poisson_cells = p.at("cells").get<std::vector<int>>();
  }
  if (j.contains("trajectory")) {
    const json& t = j.at("trajectory");
    c.trajectory_x = vec_or(t, "start_x", c.trajectory_x);
    c.trajectory_v = vec_or(t, "start_v", c.trajectory_v);
  }
  if (j.contains("velocity_lemma")) {
    const json& v = j.at("velocity_lemma");
    if (v.contains("depths")) c.vl_depths = v.at("depths").get<std::vector<double>>();
    c.vl_tangential_speed = get_or<double>(v, "tangential_speed", 1.0);
    c.vl_reflections = get_or<int>(v, "reflections", 5);
  }
  if (j.contains("decay_scan")) {
    const json& s = j.at("decay_scan");
    c.scan_direction = vec_or(s, "direction", c.scan_direction);
    c.scan_d0 = get_or<double>(s, "d0", 0.2);
    c.scan_m_max = get_or<int>(s, "m_max", 6);
    c.scan_time_derivative = get_or<bool>(s, "time_derivative", false);
  }
  if (j.contains("charge")) {
    const json& q = j.at("charge");
    c.charge_base = get_or<double>(q, "base", 1.0);
    c.charge_linear = vec_or(q, "linear", Vec3{});
    c.charge_linear_t = vec_or(q, "linear_t", Vec3{});
  }
  if (j.contains("picard")) {
    const json& p = j.at("picard");
    c.picard_n_max = get_or<int>(p, "n_max", 8);
    c.picard_tol = get_or<double>(p, "tol", 1e-3);
  }

  c.validate();
  return c;
}

void RunConfig::validate() {
  warnings.clear();
  if (domain_kind != "ball" && domain_kind != "ellipsoid" && domain_kind != "level-set")
    throw ConfigError("domain.kind: '" + domain_kind + "' is not ball|ellipsoid|level-set");
  if (domain_kind == "ball" && !(ball_radius > 0.0))
    throw ConfigError("domain.radius: must be positive");
  if (domain_kind == "ellipsoid" &&
      !(semi_axes.x > 0.0 && semi_axes.y > 0.0 && semi_axes.z > 0.0))
    throw ConfigError("domain.semi_axes: must all be positive");
  if (domain_kind == "level-set" && level_set_terms.empty())
    throw ConfigError("domain.terms: level-set domain needs at least one term");
  for (const auto& t : level_set_terms)
    for (int a = 0; a < 3; ++a)
      if (t.powers[a] < 0) throw ConfigError("domain.terms[].powers: must be nonnegative");

  if (grid_cells < 16 && grid_h <= 0.0)
    throw ConfigError("grid.cells: must be at least 16");
  if (!(solver_tol > 0.0)) throw ConfigError("grid.tol: must be positive");
  if (!(T > 0.0)) throw ConfigError("time.T: must be positive");
  if (!(dt > 0.0)) throw ConfigError("time.dt: must be positive");
  if (dt > T) throw ConfigError("time.dt: larger than the horizon T");
  if (particles < 1) throw ConfigError("initial.N: must be at least 1");
  if (workers < 1) throw ConfigError("workers: must be at least 1");
  if (profile != "zero" && profile != "uniform-box" && profile != "maxwellian-bump" &&
      profile != "ring-bump")
    throw ConfigError("initial.profile: '" + profile + "' is not recognized");
  if (profile != "zero" && profile != "uniform-box") {
    if (!(x_radius > 0.0)) throw ConfigError("initial.x_radius: must be positive");
    if (!(v_max > 0.0)) throw ConfigError("initial.v_max: must be positive");
    if (!(v_thermal > 0.0)) throw ConfigError("initial.v_thermal: must be positive");
  }
  if (scan_m_max < 0) throw ConfigError("decay_scan.m_max: must be nonnegative");
  if (picard_n_max < 1) throw ConfigError("picard.n_max: must be at least 1");
  if (mode == RunMode::poisson_test && domain_kind != "ball")
    throw ConfigError("poisson-test mode compares against the analytic ball solutions; "
                      "domain.kind must be ball");
  for (int c : poisson_cells)
    if (c < 16) throw ConfigError("poisson_test.cells: every entry must be at least 16");

  // CFL-style advisory, not an error
  const double L = domain_kind == "ball"
                       ? 2.0 * ball_radius
                       : 2.0 * std::max({semi_axes.x, semi_axes.y, semi_axes.z});
  const double h_est = grid_h > 0.0 ? grid_h : L * 1.05 / grid_cells;
  const double q0 = profile == "zero" ? 0.0 : v_max;
  if (q0 > 0.0 && dt >= 0.5 * h_est / q0)
    warnings.push_back("dt >= 0.5 h / Q(0): particles can cross more than half a cell per step");
}

ConvexDomain RunConfig::make_domain() const {
  if (domain_kind == "ball") return ConvexDomain::ball(domain_center, ball_radius);
  if (domain_kind == "ellipsoid") return ConvexDomain::ellipsoid(domain_center, semi_axes);
  return ConvexDomain::level_set(domain_center, level_set_terms);
}

InitialData RunConfig::make_initial(const ConvexDomain& domain) const {
  const double delta = flatness_delta > 0.0 ? flatness_delta : 0.02 * domain.diameter();
  if (profile == "zero") return InitialData::zero_profile();
  if (profile == "uniform-box")
    return InitialData::uniform_box(x_box_lo, x_box_hi, v_box_lo, v_box_hi, amplitude);
  if (profile == "ring-bump")
    return InitialData::ring_bump(x_center, x_radius, amplitude, v_ring, v_ring_width, v_max,
                                  delta);
  return InitialData::maxwellian_bump(x_center, x_radius, amplitude, v_thermal, v_max, delta);
}

std::string RunConfig::manifest_json() const {
  json j;
  j["mode"] = to_string(mode);
  j["domain"] = {{"kind", domain_kind},
                 {"center", {domain_center.x, domain_center.y, domain_center.z}}};
  if (domain_kind == "ball") j["domain"]["radius"] = ball_radius;
  if (domain_kind == "ellipsoid")
    j["domain"]["semi_axes"] = {semi_axes.x, semi_axes.y, semi_axes.z};
  if (domain_kind == "level-set") {
    json terms = json::array();
    for (const auto& t : level_set_terms)
      terms.push_back({{"coef", t.coef}, {"powers", {t.powers[0], t.powers[1], t.powers[2]}}});
    j["domain"]["terms"] = terms;
  }
  j["grid"] = {{"cells", grid_cells}, {"h", grid_h}, {"tol", solver_tol}};
  j["initial"] = {{"profile", profile},
                  {"amplitude", amplitude},
                  {"x_center", {x_center.x, x_center.y, x_center.z}},
                  {"x_radius", x_radius},
                  {"v_thermal", v_thermal},
                  {"v_max", v_max},
                  {"v_ring", v_ring},
                  {"v_ring_width", v_ring_width},
                  {"x_box_lo", {x_box_lo.x, x_box_lo.y, x_box_lo.z}},
                  {"x_box_hi", {x_box_hi.x, x_box_hi.y, x_box_hi.z}},
                  {"v_box_lo", {v_box_lo.x, v_box_lo.y, v_box_lo.z}},
                  {"v_box_hi", {v_box_hi.x, v_box_hi.y, v_box_hi.z}},
                  {"flatness_delta", flatness_delta},
                  {"N", particles},
                  {"seed", seed}};
  j["time"] = {{"T", T}, {"dt", dt}};
  j["output_dir"] = output_dir;
  j["q_ceiling"] = q_ceiling;
  j["workers"] = workers;
  j["dump_fields"] = dump_fields;
  j["poisson_test"] = {{"cells", poisson_cells}};
  j["trajectory"] = {{"start_x", {trajectory_x.x, trajectory_x.y, trajectory_x.z}},
                     {"start_v", {trajectory_v.x, trajectory_v.y, trajectory_v.z}}};
  j["velocity_lemma"] = {{"depths", vl_depths},
                         {"tangential_speed", vl_tangential_speed},
                         {"reflections", vl_reflections}};
  j["decay_scan"] = {{"direction", {scan_direction.x, scan_direction.y, scan_direction.z}},
                     {"d0", scan_d0},
                     {"m_max", scan_m_max},
                     {"time_derivative", scan_time_derivative}};
  j["charge"] = {{"base", charge_base},
                 {"linear", {charge_linear.x, charge_linear.y, charge_linear.z}},
                 {"linear_t", {charge_linear_t.x, charge_linear_t.y, charge_linear_t.z}}};
  j["picard"] = {{"n_max", picard_n_max}, {"tol", picard_tol}};
  j["warnings"] = warnings;
  return j.dump(2) + "\n";
}

}  // namespace vp
