#pragma once
#include <optional>
#include <vector>

#include "vp/ensemble.hpp"
#include "vp/field_diagnostics.hpp"
#include "vp/poisson.hpp"

namespace vp {

// Per-step conservation and support diagnostics.
struct DiagnosticsRecord {
  double t = 0.0;
  double mass = 0.0;
  double kinetic_energy = 0.0;  // integral v^2 f
  double field_energy = 0.0;    // integral E^2
  double total_energy = 0.0;    // their sum is the conserved combination
  double q = 0.0;               // running max |v|
  double rho_max = 0.0;
  double rho_53 = 0.0;          // L^{5/3} norm of rho
  double hopf_margin = 0.0;     // eps0 estimate (0 when the scan is skipped)
};

struct SimulationParams {
  double T = 1.0;
  double dt = 1e-3;
  double solver_tol = 1e-10;
  int workers = 1;
  // ceiling for the support bound Q(t); <= 0 derives 3 Q0 + 3 sqrt(sup|phi0|)
  double q_ceiling = 0.0;
  int hopf_every = 1;        // scan cadence in steps; 0 disables
  double hopf_band = 0.0;    // 0 -> half the tubular width
  int hopf_directions = 64;
  // optional density-bound audit: rho_max <= (4pi/3) max_f0 Q^3 * slack
  double density_bound_max_f0 = 0.0;  // 0 disables
  double density_bound_slack = 1.1;
};

struct SimulationResult {
  std::vector<DiagnosticsRecord> records;
  ParticleEnsemble final_ensemble;
  double sup_abs_phi = 0.0;
  double q_ceiling = 0.0;
  bool density_bound_ok = true;
  double density_bound_worst = 0.0;  // max over steps of rho_max / bound
  long total_reflections = 0;
};

// Self-consistent time stepping of the coupled system: half kick with the
// current field, straight drift with specular wall reflections, deposit,
// solve, half kick with the new field. Mass is conserved exactly by
// construction; Q(t) exceeding the ceiling throws BlowupSuspected.
SimulationResult self_consistent_run(const ParticleEnsemble& initial,
                                     std::shared_ptr<const CutCellGrid> grid,
                                     const ConvexDomain& domain, const SimulationParams& params);

}  // namespace vp
