#include "vp/picard.hpp"

#include <algorithm>
#include <cmath>

#include "vp/dynamics.hpp"
#include "vp/errors.hpp"
#include "vp/util.hpp"

namespace vp {

namespace {

// Field history stored as interior potential values per step time; fields are
// rematerialized (values + one-sided gradients) in a sliding window.
struct History {
  std::shared_ptr<const CutCellGrid> grid;
  std::vector<std::vector<double>> phi;  // steps+1 entries, interior unknowns

  PotentialField materialize(std::size_t k) const {
    return PotentialField::from_values(grid, phi[k]);
  }
};

double field_l2(const PotentialField& f) {
  const CutCellGrid& g = f.grid();
  KahanSum s;
  for (std::size_t u = 0; u < g.n_interior(); ++u)
    s.add(norm2(f.gradient_at_cell(g.interior_cells()[u])) *
          g.cell_volume(static_cast<int32_t>(u)));
  return std::sqrt(s.value());
}

double max_field_cell(const PotentialField& f) {
  const CutCellGrid& g = f.grid();
  double m = 0.0;
  for (std::size_t u = 0; u < g.n_interior(); ++u)
    m = std::max(m, norm2(f.gradient_at_cell(g.interior_cells()[u])));
  return std::sqrt(m);
}

std::vector<double> interior_values(const PotentialField& f) {
  const CutCellGrid& g = f.grid();
  std::vector<double> v(g.n_interior());
  for (std::size_t u = 0; u < g.n_interior(); ++u) v[u] = f.value_at_cell(g.interior_cells()[u]);
  return v;
}

}  // namespace

PicardResult picard_run(const ParticleEnsemble& initial,
                        std::shared_ptr<const CutCellGrid> grid, const ConvexDomain& domain,
                        const PicardParams& params) {
  PicardResult res;
  res.tol = params.tol;
  const long steps = std::lround(params.T / params.dt);
  res.steps = static_cast<int>(steps);

  const bool empty = initial.particles.empty() || !(initial.total_weight > 0.0);
  const ZeroField drift_field;

  // frozen iterate: the distribution (hence the field) never moves
  DensityGrid rho0 = deposit(initial, grid, params.workers);
  std::vector<double> phi0(grid->n_interior(), 0.0);
  double norm_ref = 0.0;
  double max_e0 = 0.0;
  {
    if (!empty) {
      PotentialField f0 = solve_poisson(rho0, domain, params.solver_tol);
      phi0 = interior_values(f0);
      norm_ref = field_l2(f0);
      max_e0 = max_field_cell(f0);
    }
    PicardIterate it0;
    it0.n = 0;
    it0.delta = 0.0;
    it0.q_curve.assign(steps + 1, initial.q0_measured);
    it0.max_field = 0.0;  // iterate 0 is pushed by nothing
    res.iterates.push_back(std::move(it0));
  }

  History prev;  // E^{n-1}
  prev.grid = grid;
  prev.phi.assign(steps + 1, phi0);
  double prev_max_field = max_e0;

  for (int n = 1; n <= params.n_max; ++n) {
    PicardIterate it;
    it.n = n;
    it.max_field = prev_max_field;

    ParticleEnsemble ens = initial;
    QTracker q(initial.q0_measured);

    History next;
    next.grid = grid;
    next.phi.reserve(steps + 1);
    next.phi.push_back(phi0);  // f^n(0) = f_0, so the t=0 field repeats

    double delta = 0.0;
    double next_max_field = !empty ? max_e0 : 0.0;

    PotentialField old_k = prev.materialize(0);
    PotentialField solved = PotentialField::from_values(grid, phi0);

    const auto record = [&](double t, const DensityGrid& rho, const PotentialField& f) {
      DiagnosticsRecord r;
      r.t = t;
      r.mass = rho.total_mass;
      r.kinetic_energy = ens.kinetic_energy();
      r.field_energy = empty ? 0.0 : f.field_energy();
      r.total_energy = r.kinetic_energy + r.field_energy;
      r.q = q.update(ens);
      it.q_curve.push_back(r.q);
      it.records.push_back(r);
    };

    record(0.0, rho0, solved);

    for (long k = 0; k < steps; ++k) {
      PotentialField old_k1 = prev.materialize(k + 1);

      if (!empty) {
        parallel_for_chunks(ens.particles.size(), params.workers,
                            [&](std::size_t lo, std::size_t hi, int) {
                              for (std::size_t i = lo; i < hi; ++i) {
                                Particle& p = ens.particles[i];
                                p.v += old_k.field(p.x) * (0.5 * params.dt);
                              }
                            });
      }
      parallel_for_chunks(ens.particles.size(), params.workers,
                          [&](std::size_t lo, std::size_t hi, int) {
                            for (std::size_t i = lo; i < hi; ++i) {
                              Particle& p = ens.particles[i];
                              PhaseState st{p.x, p.v, 0.0, 0};
                              st = advance(st, drift_field, domain, params.dt);
                              p.x = st.X;
                              p.v = st.V;
                            }
                          });
      if (!empty) {
        parallel_for_chunks(ens.particles.size(), params.workers,
                            [&](std::size_t lo, std::size_t hi, int) {
                              for (std::size_t i = lo; i < hi; ++i) {
                                Particle& p = ens.particles[i];
                                p.v += old_k1.field(p.x) * (0.5 * params.dt);
                              }
                            });
      }

      const DensityGrid rho = deposit(ens, grid, params.workers);
      if (!empty) {
        solved = solve_poisson(rho, domain, params.solver_tol, &solved);
        next.phi.push_back(interior_values(solved));
        next_max_field = std::max(next_max_field, max_field_cell(solved));

        // field delta against the previous history at the same step time
        std::vector<double> diff = next.phi.back();
        const std::vector<double>& old_vals = prev.phi[k + 1];
        for (std::size_t u = 0; u < diff.size(); ++u) diff[u] -= old_vals[u];
        const double dn = field_l2(PotentialField::from_values(grid, diff));
        delta = std::max(delta, norm_ref > 0.0 ? dn / norm_ref : dn);
      } else {
        next.phi.push_back(phi0);
      }

      record((k + 1) * params.dt, rho, solved);
      old_k = std::move(old_k1);
    }

    it.delta = delta;
    res.iterates.push_back(std::move(it));

    prev = std::move(next);
    prev_max_field = next_max_field;

    if (delta <= params.tol) {
      res.converged = true;
      break;
    }
  }

  return res;
}

}  // namespace vp
