#pragma once
#include <functional>
#include <vector>

#include "vp/poisson.hpp"

namespace vp {

struct HopfMargin {
  double eps0 = 0.0;       // inf of -phi/xperp over the sampled band
  Vec3 worst_point{};
  double band = 0.0;
  int samples = 0;
};

// Estimate the constant eps0 in phi <= -eps0 * xperp by scanning points with
// wall distance below `band` along inward normals from a deterministic set of
// boundary directions. Throws NonpositiveMargin when the infimum is not
// strictly positive (zero charge or a failed solve).
HopfMargin hopf_margin(const PotentialField& field, const ConvexDomain& domain, double band,
                       int directions = 128, int depths = 6);

// One rung of the boundary decay ladder.
struct DecayRung {
  double d = 0.0;            // wall distance
  double dphi_dtau[2] = {0.0, 0.0};
  double dphi_dt = 0.0;
};

struct DecayFit {
  double C = 0.0;        // least-squares coefficient of d*(1+|log d|)
  double r_squared = 0.0;
  double envelope = 0.0;  // max over rungs of y / (C*g(d))
};

struct DecayScan {
  std::vector<DecayRung> rungs;
  DecayFit tangential_fit;   // fit of max(|dphi/dtau1|, |dphi/dtau2|)
  DecayFit time_fit;         // fit of |dphi/dt| (zero when not requested)
  bool continuity_ok = true; // total mass of the snapshots agreed
  Vec3 anchor_point{};
};

struct DecayScanRequest {
  // charge density at a given time; called at t0 (and t0 +- dt_fd when
  // time_derivative is set)
  std::function<DensityGrid(double)> rho_at;
  double t0 = 0.0;
  double dt_fd = 1e-3;
  bool time_derivative = false;

  Vec3 direction{1.0, 0.0, 0.0};  // boundary point selector (ray from center)
  double d0 = 0.2;                // ladder start, halved m_max times
  int m_max = 6;
  double solver_tol = 1e-10;
};

// Tangential and time derivatives of phi along the inward normal from a
// boundary point, on the geometric ladder d = d0 * 2^-m, with the fitted
// C * d * (1 + |log d|) envelope. Tangential components of the field vanish
// on the Dirichlet wall, so below the grid scale they are carried by a
// wall-anchored quadratic fitted at two full-stencil depths; the probe error
// then scales with d like the signal does.
DecayScan boundary_decay_scan(const DecayScanRequest& req, const ConvexDomain& domain);

}  // namespace vp
