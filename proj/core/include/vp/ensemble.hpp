#pragma once
#include <cstdint>
#include <memory>
#include <vector>

#include "vp/grid.hpp"
#include "vp/initial_data.hpp"

namespace vp {

struct Particle {
  Vec3 x{};
  Vec3 v{};
  double weight = 0.0;
  double f0_tag = 0.0;  // profile value at creation, transported exactly
};

// Weighted particle representation of the distribution. Weights are set at
// sampling time and never change: positivity and every L^p norm of the
// transported distribution are exact in this representation.
struct ParticleEnsemble {
  std::vector<Particle> particles;
  double total_weight = 0.0;   // compensated sum in particle order
  double q0_bound = 0.0;       // analytic support bound on |v|
  double q0_measured = 0.0;    // max |v| actually sampled
  uint64_t seed = 0;
  long requested = 0;          // particles asked for
  long draws = 0;              // low-discrepancy draws consumed to keep them

  std::size_t size() const { return particles.size(); }
  double max_speed() const;
  double kinetic_energy() const;  // sum w |v|^2 (compensated, fixed order)
  double recompute_total_weight() const;
};

// Deterministic quasi-random (scrambled Halton) sampling of the profile's
// support box: the stream is drawn until n positive-weight particles are
// kept, each weighted f0 * box_volume / draws. Throws EmptySupport when the
// profile has no positive weight.
ParticleEnsemble sample_ensemble(const InitialData& data, long n, uint64_t seed);

// Cloud-in-cell deposition onto a classified grid. Weight that would land on
// exterior cells is folded back across the local tangent plane of the
// particle's footpoint, so the deposited total equals the ensemble total
// exactly (up to summation order). Throws ParticleOutside when a particle
// sits strictly outside the domain.
DensityGrid deposit(const ParticleEnsemble& ensemble, std::shared_ptr<const CutCellGrid> grid,
                    int workers = 1);

// Running maximum of |v| over all particles and all record times up to t.
class QTracker {
 public:
  explicit QTracker(double q_at_start = 0.0) : q_(q_at_start) {}
  double update(const ParticleEnsemble& e) { return q_ = std::max(q_, e.max_speed()); }
  double value() const { return q_; }

 private:
  double q_ = 0.0;
};

}  // namespace vp
