#include "vp/runner.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <nlohmann/json.hpp>

#include "vp/dynamics.hpp"
#include "vp/errors.hpp"
#include "vp/field_diagnostics.hpp"
#include "vp/io.hpp"
#include "vp/lyapunov.hpp"
#include "vp/picard.hpp"
#include "vp/simulation.hpp"

namespace vp {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void write_manifest(const RunConfig& c, const fs::path& dir) {
  std::ofstream out(dir / "manifest.json", std::ios::binary | std::ios::trunc);
  out << c.manifest_json();
}

double nan_value() { return std::numeric_limits<double>::quiet_NaN(); }

std::function<double(const Vec3&)> charge_profile(const RunConfig& c, const ConvexDomain& dom,
                                                  double t) {
  const Vec3 lin = c.charge_linear + c.charge_linear_t * t;
  const double base = c.charge_base;
  const Vec3 center = dom.center();
  return [base, lin, center](const Vec3& x) {
    return std::max(0.0, base + dot(lin, x - center));
  };
}

int mode_poisson_test(const RunConfig& c, const ConvexDomain& dom, const fs::path& dir) {
  CsvWriter csv(dir / "convergence.csv");
  csv.header({"charge", "cells", "h", "linf_error", "observed_order"});

  const double R = c.ball_radius;
  const auto analytic = [&](const Vec3& x, bool linear) {
    const double r2 = norm2(x - dom.center());
    double phi = (r2 - R * R) / 6.0;
    if (linear) phi += (x.x - dom.center().x) * (r2 - R * R) / 10.0;
    return phi;
  };

  for (int pass = 0; pass < 2; ++pass) {
    const bool linear = pass == 1;
    double prev_err = 0.0;
    for (std::size_t level = 0; level < c.poisson_cells.size(); ++level) {
      const int cells = c.poisson_cells[level];
      const auto grid = make_grid(dom, GridSpec::cover_cells(dom, cells));
      const auto rho_fn = [&](const Vec3& x) {
        return linear ? 1.0 + (x.x - dom.center().x) : 1.0;
      };
      const DensityGrid rho = DensityGrid::from_function(grid, rho_fn);
      const PotentialField phi = solve_poisson(rho, dom, c.solver_tol);

      double err = 0.0;
      for (std::size_t u = 0; u < grid->n_interior(); ++u) {
        const std::size_t cell = grid->interior_cells()[u];
        const int i = static_cast<int>(cell % grid->spec().n[0]);
        const int jj = static_cast<int>((cell / grid->spec().n[0]) % grid->spec().n[1]);
        const int kk = static_cast<int>(cell / (std::size_t(grid->spec().n[0]) * grid->spec().n[1]));
        const Vec3 xc = grid->spec().cell_center(i, jj, kk);
        err = std::max(err, std::abs(phi.value_at_cell(cell) - analytic(xc, linear)));
      }
      const double order = level == 0 ? nan_value() : std::log2(prev_err / err);
      csv.row({linear ? 1.0 : 0.0, double(cells), grid->spec().h, err, order});
      prev_err = err;

      if (c.dump_fields) {
        dump_grid_scalar(dir / ("phi_" + std::string(linear ? "linear_" : "uniform_") +
                                std::to_string(cells)),
                         grid->spec(), phi.values(), 0.0);
        dump_grid_scalar(dir / ("rho_" + std::string(linear ? "linear_" : "uniform_") +
                                std::to_string(cells)),
                         grid->spec(), rho.rho, 0.0);
      }
    }
  }
  return kExitOk;
}

int mode_trajectory(const RunConfig& c, const ConvexDomain& dom, const fs::path& dir) {
  const auto grid = make_grid(dom, c.grid_h > 0.0 ? GridSpec::cover(dom, c.grid_h)
                                                  : GridSpec::cover_cells(dom, c.grid_cells));
  const DensityGrid rho = DensityGrid::from_function(grid, charge_profile(c, dom, 0.0));
  std::optional<PotentialField> field;
  if (rho.total_mass > 0.0) field.emplace(solve_poisson(rho, dom, c.solver_tol));
  const ZeroField zero;
  const FieldSource& src = field ? static_cast<const FieldSource&>(*field)
                                 : static_cast<const FieldSource&>(zero);

  const long steps = std::lround(c.T / c.dt);
  std::vector<ReflectionEvent> events;
  PhaseState start{c.trajectory_x, c.trajectory_v, 0.0, 0};
  const auto samples = integrate_trajectory(start, src, dom, c.dt, steps, &events);

  CsvWriter csv(dir / "trajectory.csv");
  csv.header({"s", "X1", "X2", "X3", "V1", "V2", "V3", "xperp", "vperp", "alpha", "reflections"});
  for (const auto& s : samples) {
    csv.row({s.s, s.state.X.x, s.state.X.y, s.state.X.z, s.state.V.x, s.state.V.y, s.state.V.z,
             s.in_band ? s.xperp : nan_value(), s.in_band ? s.vperp : nan_value(),
             s.in_band ? s.alpha : nan_value(), double(s.state.reflections)});
  }
  return kExitOk;
}

int mode_velocity_lemma(const RunConfig& c, const ConvexDomain& dom, const fs::path& dir) {
  const auto grid = make_grid(dom, GridSpec::cover_cells(dom, c.grid_cells));
  const DensityGrid rho = DensityGrid::from_function(grid, charge_profile(c, dom, 0.0));
  if (!(rho.total_mass > 0.0))
    throw NonpositiveMargin("velocity-lemma mode needs a nontrivial charge");
  const PotentialField field = solve_poisson(rho, dom, c.solver_tol);

  // deterministic launch site away from the coordinate axes
  const Vec3 bp = dom.boundary_point(normalized(Vec3{0.3, 0.6, 0.74}));
  const BoundaryFrame fr = surface_frame(bp, dom);

  CsvWriter csv(dir / "velocity_lemma.csv");
  csv.header({"x0_perp", "alpha_ratio", "ssd_ratio", "reflections", "band_exit", "max_quotient"});

  bool all_finite = true;
  for (double depth : c.vl_depths) {
    PhaseState st;
    st.X = bp - fr.normal * depth;
    st.V = fr.tangent[0] * c.vl_tangential_speed;

    // integrate until the requested number of reflections (cap on steps)
    std::vector<ReflectionEvent> events;
    std::vector<TrajectorySample> samples;
    const long max_steps = std::lround(20.0 / c.dt);
    samples = integrate_trajectory(st, field, dom, c.dt, max_steps, &events);
    long cut = samples.size();
    if (!events.empty()) {
      std::size_t e = 0;
      for (long i = 0; i < long(samples.size()); ++i) {
        while (e < events.size() && events[e].s <= samples[i].s) ++e;
        if (long(e) >= c.vl_reflections) {
          cut = i + 1;
          break;
        }
      }
    }
    const std::span<const TrajectorySample> used(samples.data(), cut);
    const AlphaRatioReport rep = velocity_lemma_ratio(used);
    const AlphaDriftReport drift = dalpha_dt_check(used, events);
    if (!std::isfinite(rep.ssd_ratio)) all_finite = false;
    csv.row({depth, rep.alpha_ratio, rep.ssd_ratio, double(c.vl_reflections),
             rep.band_exit ? 1.0 : 0.0, drift.max_quotient});
  }
  return all_finite ? kExitOk : kExitInvariant;
}

int mode_decay_scan(const RunConfig& c, const ConvexDomain& dom, const fs::path& dir) {
  const auto grid = make_grid(dom, c.grid_h > 0.0 ? GridSpec::cover(dom, c.grid_h)
                                                  : GridSpec::cover_cells(dom, c.grid_cells));
  DecayScanRequest req;
  req.rho_at = [&](double t) {
    return DensityGrid::from_function(grid, charge_profile(c, dom, t));
  };
  req.t0 = 0.0;
  req.dt_fd = c.dt;
  req.time_derivative = c.scan_time_derivative;
  req.direction = c.scan_direction;
  req.d0 = c.scan_d0;
  req.m_max = c.scan_m_max;
  req.solver_tol = c.solver_tol;

  const DecayScan scan = boundary_decay_scan(req, dom);

  CsvWriter csv(dir / "decay_scan.csv");
  csv.header({"d", "dphi_dtau1", "dphi_dtau2", "dphi_dt"});
  for (const auto& r : scan.rungs)
    csv.row({r.d, r.dphi_dtau[0], r.dphi_dtau[1], r.dphi_dt});

  json fit;
  fit["tangential"] = {{"C", scan.tangential_fit.C},
                       {"r_squared", scan.tangential_fit.r_squared},
                       {"envelope", scan.tangential_fit.envelope}};
  fit["time"] = {{"C", scan.time_fit.C},
                 {"r_squared", scan.time_fit.r_squared},
                 {"envelope", scan.time_fit.envelope}};
  fit["continuity_ok"] = scan.continuity_ok;
  std::ofstream out(dir / "decay_fit.json", std::ios::binary);
  out << fit.dump(2) << "\n";
  return kExitOk;
}

json validation_json(const InitialData& data, const ConvexDomain& dom) {
  const ValidationReport vr = validate_initial(data, dom, 32, 16, 24);
  if (!vr.pass())
    std::cerr << "warning: initial data fails the wall-compatibility validation\n";
  return json{{"pass", vr.pass()},
              {"worst_reflection_violation", vr.worst_reflection_violation},
              {"worst_gradient_violation", vr.worst_gradient_violation},
              {"worst_flatness_violation", vr.worst_flatness_violation},
              {"nonnegative", vr.nonnegative_ok}};
}

int mode_picard(const RunConfig& c, const ConvexDomain& dom, const fs::path& dir) {
  const auto grid = make_grid(dom, GridSpec::cover_cells(dom, c.grid_cells));
  const InitialData data = c.make_initial(dom);

  PicardParams params;
  params.T = c.T;
  params.dt = c.dt;
  params.n_max = c.picard_n_max;
  params.tol = c.picard_tol;
  params.solver_tol = c.solver_tol;
  params.workers = c.workers;

  PicardResult result;
  if (data.profile == InitialData::Profile::zero) {
    ParticleEnsemble empty;
    result = picard_run(empty, grid, dom, params);
  } else {
    result = picard_run(sample_ensemble(data, c.particles, c.seed), grid, dom, params);
  }

  json summary;
  summary["converged"] = result.converged;
  summary["tol"] = result.tol;
  summary["steps"] = result.steps;
  summary["initial_validation"] = validation_json(data, dom);
  json iters = json::array();
  for (const auto& it : result.iterates) {
    json ji;
    ji["n"] = it.n;
    ji["delta"] = it.delta;
    ji["max_field"] = it.max_field;
    ji["q_curve"] = it.q_curve;
    iters.push_back(ji);

    if (it.n >= 1) {
      CsvWriter csv(dir / ("iterate_" + std::to_string(it.n) + "_diagnostics.csv"));
      csv.header({"t", "mass", "kinetic_energy", "field_energy", "total_energy", "Q", "rho_max",
                  "rho_53", "hopf_margin"});
      for (const auto& r : it.records)
        csv.row({r.t, r.mass, r.kinetic_energy, r.field_energy, r.total_energy, r.q, r.rho_max,
                 r.rho_53, r.hopf_margin});
    }
  }
  summary["iterates"] = iters;
  std::ofstream out(dir / "picard_summary.json", std::ios::binary);
  out << summary.dump(2) << "\n";
  return kExitOk;
}

int mode_run(const RunConfig& c, const ConvexDomain& dom, const fs::path& dir) {
  const auto grid = make_grid(dom, c.grid_h > 0.0 ? GridSpec::cover(dom, c.grid_h)
                                                  : GridSpec::cover_cells(dom, c.grid_cells));
  const InitialData data = c.make_initial(dom);

  ParticleEnsemble ens;
  if (data.profile != InitialData::Profile::zero)
    ens = sample_ensemble(data, c.particles, c.seed);

  SimulationParams params;
  params.T = c.T;
  params.dt = c.dt;
  params.solver_tol = c.solver_tol;
  params.workers = c.workers;
  params.q_ceiling = c.q_ceiling;
  params.density_bound_max_f0 = data.max_f0();

  const SimulationResult result = self_consistent_run(ens, grid, dom, params);

  CsvWriter csv(dir / "diagnostics.csv");
  csv.header({"t", "mass", "kinetic_energy", "field_energy", "total_energy", "Q", "rho_max",
              "rho_53", "hopf_margin"});
  for (const auto& r : result.records)
    csv.row({r.t, r.mass, r.kinetic_energy, r.field_energy, r.total_energy, r.q, r.rho_max,
             r.rho_53, r.hopf_margin});

  json summary;
  summary["initial_validation"] = validation_json(data, dom);
  summary["sup_abs_phi"] = result.sup_abs_phi;
  summary["q_ceiling"] = result.q_ceiling;
  summary["density_bound_ok"] = result.density_bound_ok;
  summary["density_bound_worst"] = result.density_bound_worst;
  summary["total_reflections"] = result.total_reflections;
  summary["final_Q"] = result.records.empty() ? 0.0 : result.records.back().q;
  std::ofstream out(dir / "run_summary.json", std::ios::binary);
  out << summary.dump(2) << "\n";

  if (c.dump_fields) {
    const DensityGrid rho = deposit(result.final_ensemble, grid, c.workers);
    dump_grid_scalar(dir / "rho_final", grid->spec(), rho.rho, c.T);
    if (rho.total_mass > 0.0) {
      const PotentialField phi = solve_poisson(rho, dom, c.solver_tol);
      dump_grid_scalar(dir / "phi_final", grid->spec(), phi.values(), c.T);
    }
  }
  return result.density_bound_ok ? kExitOk : kExitInvariant;
}

}  // namespace

int run_config(const RunConfig& config) {
  const fs::path dir(config.output_dir);
  fs::create_directories(dir);
  write_manifest(config, dir);
  for (const auto& w : config.warnings) std::cerr << "warning: " << w << "\n";

  const ConvexDomain dom = config.make_domain();
  switch (config.mode) {
    case RunMode::poisson_test:
      return mode_poisson_test(config, dom, dir);
    case RunMode::trajectory:
      return mode_trajectory(config, dom, dir);
    case RunMode::velocity_lemma:
      return mode_velocity_lemma(config, dom, dir);
    case RunMode::decay_scan:
      return mode_decay_scan(config, dom, dir);
    case RunMode::picard:
      return mode_picard(config, dom, dir);
    case RunMode::run:
      return mode_run(config, dom, dir);
  }
  return kExitConfig;
}

int run_config_file(const std::string& config_path, const std::string& mode_override,
                    const std::string& out_dir_override, int workers_override,
                    long seed_override) {
  try {
    RunConfig config = RunConfig::from_json_file(config_path);
    if (!mode_override.empty()) config.mode = mode_from_string(mode_override);
    if (!out_dir_override.empty()) config.output_dir = out_dir_override;
    if (workers_override > 0) config.workers = workers_override;
    if (seed_override >= 0) config.seed = static_cast<uint64_t>(seed_override);
    config.validate();
    return run_config(config);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const SolverDivergence& e) {
    std::cerr << "solver error: " << e.what() << "\n";
    return kExitSolver;
  } catch (const GridTooCoarse& e) {
    std::cerr << "solver error: " << e.what() << "\n";
    return kExitSolver;
  } catch (const FieldEvalFailure& e) {
    std::cerr << "solver error: " << e.what() << "\n";
    return kExitSolver;
  } catch (const LadderExitsGrid& e) {
    std::cerr << "solver error: " << e.what() << "\n";
    return kExitSolver;
  } catch (const Error& e) {
    std::cerr << "invariant violation: " << e.what() << "\n";
    return kExitInvariant;
  }
}

}  // namespace vp
