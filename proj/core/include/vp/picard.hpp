#pragma once
#include <memory>
#include <vector>

#include "vp/simulation.hpp"

namespace vp {

struct PicardIterate {
  int n = 0;
  double delta = 0.0;          // sup over step times of the relative L2 field change
  std::vector<double> q_curve; // Q^n at every step time
  std::vector<DiagnosticsRecord> records;
  double max_field = 0.0;      // sup over time and cells of |E^{n-1}| used to push
};

struct PicardResult {
  std::vector<PicardIterate> iterates;
  bool converged = false;
  double tol = 0.0;
  int steps = 0;
};

struct PicardParams {
  double T = 0.1;
  double dt = 1e-3;
  int n_max = 8;
  double tol = 1e-3;           // on the normalized field delta
  double solver_tol = 1e-10;
  int workers = 1;
};

// Frozen-field iteration towards the self-consistent solution: iterate 0
// freezes the distribution at its initial value (a constant-in-time field
// history); iterate n >= 1 pushes the initial ensemble through the previous
// iterate's field history while recording its own. Stops when the sup-in-time
// relative L2 distance between consecutive field histories drops below tol
// or after n_max iterates (not converging is reported, not fatal).
PicardResult picard_run(const ParticleEnsemble& initial,
                        std::shared_ptr<const CutCellGrid> grid, const ConvexDomain& domain,
                        const PicardParams& params);

}  // namespace vp
