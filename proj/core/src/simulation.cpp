#include "vp/simulation.hpp"

#include <algorithm>
#include <cmath>

#include "vp/dynamics.hpp"
#include "vp/errors.hpp"
#include "vp/util.hpp"

namespace vp {

namespace {

double rho_max_of(const DensityGrid& d) {
  double m = 0.0;
  for (std::size_t u = 0; u < d.grid->n_interior(); ++u)
    m = std::max(m, d.rho[d.grid->interior_cells()[u]]);
  return m;
}

double rho_53_of(const DensityGrid& d) {
  const CutCellGrid& g = *d.grid;
  const double h3 = g.spec().h * g.spec().h * g.spec().h;
  KahanSum s;
  for (std::size_t u = 0; u < g.n_interior(); ++u) {
    const std::size_t c = g.interior_cells()[u];
    const double vol = std::max(g.volume_weight(static_cast<int32_t>(u)), 0.02) * h3;
    s.add(std::pow(d.rho[c], 5.0 / 3.0) * vol);
  }
  return std::pow(s.value(), 3.0 / 5.0);
}

}  // namespace

SimulationResult self_consistent_run(const ParticleEnsemble& initial,
                                     std::shared_ptr<const CutCellGrid> grid,
                                     const ConvexDomain& domain, const SimulationParams& params) {
  SimulationResult res;
  res.final_ensemble = initial;
  ParticleEnsemble& ens = res.final_ensemble;

  const long steps = std::lround(params.T / params.dt);
  const double expected_mass = initial.total_weight;
  QTracker q(std::max(initial.q0_measured, 0.0));

  const double hopf_band =
      params.hopf_band > 0.0 ? params.hopf_band : 0.5 * domain.tubular_width();
  const ZeroField drift_field;

  DensityGrid rho = deposit(ens, grid, params.workers);
  std::optional<PotentialField> field;
  const bool empty = !(expected_mass > 0.0) || ens.particles.empty();
  if (!empty) field.emplace(solve_poisson(rho, domain, params.solver_tol));

  res.sup_abs_phi = field ? std::max(std::abs(field->min_value()), std::abs(field->max_value()))
                          : 0.0;
  res.q_ceiling = params.q_ceiling > 0.0
                      ? params.q_ceiling
                      : 3.0 * std::max(ens.q0_bound, ens.q0_measured) +
                            3.0 * std::sqrt(res.sup_abs_phi);
  if (res.q_ceiling <= 0.0) res.q_ceiling = 1.0;  // zero-data runs never trip

  const auto record = [&](double t) {
    DiagnosticsRecord r;
    r.t = t;
    r.mass = rho.total_mass;
    r.kinetic_energy = ens.kinetic_energy();
    r.field_energy = field ? field->field_energy() : 0.0;
    r.total_energy = r.kinetic_energy + r.field_energy;
    r.q = q.update(ens);
    r.rho_max = rho_max_of(rho);
    r.rho_53 = rho_53_of(rho);
    const long step_index = std::lround(t / params.dt);
    if (field && params.hopf_every > 0 && (step_index % params.hopf_every == 0)) {
      r.hopf_margin = hopf_margin(*field, domain, hopf_band, params.hopf_directions).eps0;
    }
    res.records.push_back(r);

    if (std::abs(rho.total_mass - expected_mass) >
        1e-10 * std::max(std::abs(expected_mass), 1e-300))
      throw Error("self_consistent_run: deposited mass drifted from the ensemble total");
    if (r.q > res.q_ceiling)
      throw BlowupSuspected("self_consistent_run: Q(t) exceeded the configured ceiling");
    if (params.density_bound_max_f0 > 0.0) {
      const double bound = (4.0 * M_PI / 3.0) * params.density_bound_max_f0 * r.q * r.q * r.q *
                           params.density_bound_slack;
      const double ratio = bound > 0.0 ? r.rho_max / bound : 0.0;
      res.density_bound_worst = std::max(res.density_bound_worst, ratio);
      if (ratio > 1.0) res.density_bound_ok = false;
    }
  };

  record(0.0);

  for (long k = 0; k < steps; ++k) {
    // half kick with the current field
    if (field) {
      parallel_for_chunks(ens.particles.size(), params.workers,
                          [&](std::size_t lo, std::size_t hi, int) {
                            for (std::size_t i = lo; i < hi; ++i) {
                              Particle& p = ens.particles[i];
                              p.v += field->field(p.x) * (0.5 * params.dt);
                            }
                          });
    }

    // straight drift with specular reflections
    std::vector<long> refl(std::max<std::size_t>(params.workers, 1), 0);
    parallel_for_chunks(ens.particles.size(), params.workers,
                        [&](std::size_t lo, std::size_t hi, int w) {
                          for (std::size_t i = lo; i < hi; ++i) {
                            Particle& p = ens.particles[i];
                            PhaseState st{p.x, p.v, 0.0, 0};
                            st = advance(st, drift_field, domain, params.dt);
                            p.x = st.X;
                            p.v = st.V;
                            refl[w] += st.reflections;
                          }
                        });
    for (long r : refl) res.total_reflections += r;

    rho = deposit(ens, grid, params.workers);
    if (!empty) {
      PotentialField next = solve_poisson(rho, domain, params.solver_tol, field ? &*field : nullptr);
      field.emplace(std::move(next));
      // second half kick with the new field
      parallel_for_chunks(ens.particles.size(), params.workers,
                          [&](std::size_t lo, std::size_t hi, int) {
                            for (std::size_t i = lo; i < hi; ++i) {
                              Particle& p = ens.particles[i];
                              p.v += field->field(p.x) * (0.5 * params.dt);
                            }
                          });
    }

    record((k + 1) * params.dt);
    res.sup_abs_phi = std::max(
        res.sup_abs_phi,
        field ? std::max(std::abs(field->min_value()), std::abs(field->max_value())) : 0.0);
  }

  return res;
}

}  // namespace vp
