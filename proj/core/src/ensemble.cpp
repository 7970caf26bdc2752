#include "vp/ensemble.hpp"

#include <algorithm>
#include <cmath>

#include "vp/errors.hpp"
#include "vp/frame.hpp"
#include "vp/util.hpp"

namespace vp {

double ParticleEnsemble::max_speed() const {
  double m = 0.0;
  for (const auto& p : particles) m = std::max(m, norm2(p.v));
  return std::sqrt(m);
}

double ParticleEnsemble::kinetic_energy() const {
  KahanSum s;
  for (const auto& p : particles) s.add(p.weight * norm2(p.v));
  return s.value();
}

double ParticleEnsemble::recompute_total_weight() const {
  KahanSum s;
  for (const auto& p : particles) s.add(p.weight);
  return s.value();
}

ParticleEnsemble sample_ensemble(const InitialData& data, long n, uint64_t seed) {
  if (n < 1) throw Error("sample_ensemble: need at least one draw");

  Vec3 x_lo, x_hi, v_lo, v_hi;
  data.support_box(x_lo, x_hi, v_lo, v_hi);
  double box_volume = 1.0;
  for (int a = 0; a < 3; ++a) box_volume *= (x_hi[a] - x_lo[a]) * (v_hi[a] - v_lo[a]);

  // scrambled Halton: radical-inverse sequences rotated by a seeded offset
  static const uint32_t bases[6] = {2, 3, 5, 7, 11, 13};
  uint64_t rng = seed;
  double shift[6];
  for (double& s : shift) s = splitmix64(rng) * 0x1.0p-64;

  ParticleEnsemble e;
  e.seed = seed;
  e.requested = n;
  e.q0_bound = data.q0();
  e.particles.reserve(n);

  // Draw the low-discrepancy stream until n support points are kept; draws
  // that land outside the support carry zero weight and are dropped, but they
  // still count in the phase-cell volume so the total stays an estimate of
  // the full integral.
  const long max_draws = 1000 * n + 1000;
  std::vector<double> raw;
  raw.reserve(n);
  long draws = 0;
  while (long(e.particles.size()) < n && draws < max_draws) {
    ++draws;
    double u[6];
    for (int d = 0; d < 6; ++d) {
      u[d] = radical_inverse(static_cast<uint64_t>(draws), bases[d]) + shift[d];
      u[d] -= std::floor(u[d]);
    }
    Particle p;
    for (int a = 0; a < 3; ++a) {
      p.x[a] = x_lo[a] + u[a] * (x_hi[a] - x_lo[a]);
      p.v[a] = v_lo[a] + u[3 + a] * (v_hi[a] - v_lo[a]);
    }
    const double f = data.f0(p.x, p.v);
    if (f <= 0.0) continue;
    p.f0_tag = f;
    raw.push_back(f);
    e.particles.push_back(p);
  }

  if (e.particles.empty()) throw EmptySupport("sample_ensemble: profile has no positive weight");
  e.draws = draws;

  const double cell_weight = box_volume / static_cast<double>(draws);
  KahanSum total;
  for (std::size_t i = 0; i < e.particles.size(); ++i) {
    e.particles[i].weight = raw[i] * cell_weight;
    total.add(e.particles[i].weight);
  }
  e.total_weight = total.value();
  e.q0_measured = e.max_speed();
  return e;
}

DensityGrid deposit(const ParticleEnsemble& ensemble, std::shared_ptr<const CutCellGrid> grid,
                    int workers) {
  const CutCellGrid& g = *grid;
  const GridSpec& sp = g.spec();
  const ConvexDomain& dom = g.domain();
  const double h = sp.h;

  const auto deposit_particle = [&](const Particle& p, std::vector<double>& mass) {
    if (dom.phi(p.x) > 0.0 && !dom.on_boundary(p.x, 1e-9))
      throw ParticleOutside("deposit: particle strictly outside the domain");

    const double ux = (p.x.x - sp.origin.x) / h - 0.5;
    const double uy = (p.x.y - sp.origin.y) / h - 0.5;
    const double uz = (p.x.z - sp.origin.z) / h - 0.5;
    const int i0 = static_cast<int>(std::floor(ux));
    const int j0 = static_cast<int>(std::floor(uy));
    const int k0 = static_cast<int>(std::floor(uz));
    const double fx = ux - i0, fy = uy - j0, fz = uz - k0;

    bool all_interior = true;
    for (int a = 0; a < 2 && all_interior; ++a)
      for (int b = 0; b < 2 && all_interior; ++b)
        for (int c = 0; c < 2; ++c)
          if (!g.interior(i0 + a, j0 + b, k0 + c)) {
            all_interior = false;
            break;
          }

    if (all_interior) {
      for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b)
          for (int c = 0; c < 2; ++c) {
            const double w = (a ? fx : 1.0 - fx) * (b ? fy : 1.0 - fy) * (c ? fz : 1.0 - fz);
            mass[sp.index(i0 + a, j0 + b, k0 + c)] += p.weight * w;
          }
      return;
    }

    // near the wall: fold exterior-cell shares back across the tangent plane
    // of the particle's footpoint so no mass leaves the domain
    const BoundaryFrame fr = project_to_boundary(p.x, dom);
    const auto interior_cell_of = [&](const Vec3& q, std::size_t& cell) -> bool {
      const int i = static_cast<int>(std::floor((q.x - sp.origin.x) / h));
      const int j = static_cast<int>(std::floor((q.y - sp.origin.y) / h));
      const int k = static_cast<int>(std::floor((q.z - sp.origin.z) / h));
      if (!g.interior(i, j, k)) return false;
      cell = sp.index(i, j, k);
      return true;
    };

    std::size_t fallback = 0;
    bool have_fallback = interior_cell_of(p.x, fallback);
    if (!have_fallback) {
      for (double step = 0.25; step <= 3.01 && !have_fallback; step += 0.25)
        have_fallback = interior_cell_of(fr.point - fr.normal * (step * h), fallback);
      if (!have_fallback)
        throw ParticleOutside("deposit: no interior cell near a wall particle");
    }

    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b)
        for (int c = 0; c < 2; ++c) {
          const double w = (a ? fx : 1.0 - fx) * (b ? fy : 1.0 - fy) * (c ? fz : 1.0 - fz);
          if (w == 0.0) continue;
          const int ci = i0 + a, cj = j0 + b, ck = k0 + c;
          if (g.interior(ci, cj, ck)) {
            mass[sp.index(ci, cj, ck)] += p.weight * w;
            continue;
          }
          const Vec3 cc = sp.cell_center(ci, cj, ck);
          const Vec3 mirror = cc - fr.normal * (2.0 * dot(cc - fr.point, fr.normal));
          std::size_t target;
          mass[interior_cell_of(mirror, target) ? target : fallback] += p.weight * w;
        }
  };

  std::vector<std::vector<double>> buffers;
  const std::size_t np = ensemble.particles.size();
  if (workers <= 1 || np < 4096) {
    buffers.emplace_back(sp.size(), 0.0);
    for (const auto& p : ensemble.particles) deposit_particle(p, buffers[0]);
  } else {
    buffers.assign(workers, std::vector<double>(sp.size(), 0.0));
    parallel_for_chunks(np, workers, [&](std::size_t lo, std::size_t hi, int w) {
      for (std::size_t i = lo; i < hi; ++i) deposit_particle(ensemble.particles[i], buffers[w]);
    });
  }

  DensityGrid d;
  d.grid = grid;
  d.mass.assign(sp.size(), 0.0);
  for (const auto& buf : buffers)  // fixed merge order
    for (std::size_t c = 0; c < buf.size(); ++c) d.mass[c] += buf[c];

  d.rho.assign(sp.size(), 0.0);
  const double h3 = h * h * h;
  KahanSum total;
  for (std::size_t u = 0; u < g.n_interior(); ++u) {
    const std::size_t c = g.interior_cells()[u];
    const double vw = std::max(g.volume_weight(static_cast<int32_t>(u)), 0.02);
    d.rho[c] = d.mass[c] / (vw * h3);
    total.add(d.mass[c]);
  }
  d.total_mass = total.value();
  return d;
}

}  // namespace vp
