#pragma once
#include <span>
#include <vector>

#include "vp/dynamics.hpp"

namespace vp {

// Time derivatives of the boundary-adapted coordinates
// (mu1, mu2, xperp, w1, w2, vperp) along a characteristic.
struct LocalDerivs {
  double dmu[2] = {0.0, 0.0};
  double dxperp = 0.0;
  double dw[2] = {0.0, 0.0};   // sigma_i
  double dvperp = 0.0;         // F
};

// Characteristic right-hand side in the boundary frame:
//   d mu_i   = w_i / m_i
//   d xperp  = vperp
//   d w_i    = E_i - vperp w_i k_i^- / m_i - sum_jl gamma^i_jl w_j w_l / m_j
//   d vperp  = E_perp + sum_j w_j^2 b_j / m_j                     (= F)
// with m_i = 1 - k_i xperp the tangent metric factors (k_i >= 0 geometric
// curvatures, b_i = -k_i). Throws FrameInvalid when a metric factor is not
// positive. The curvature coupling in d w_i carries the same signed curvature
// as the metric (k^- = -k_i), matching exact ball dynamics.
LocalDerivs local_rhs(const LocalPhase& lp, const FieldSample& sample, const BoundaryFrame& frame);

// Normal acceleration F alone; negative near the wall for convex domains with
// nonnegative charge.
double normal_acceleration(const LocalPhase& lp, const FieldSample& sample,
                           const BoundaryFrame& frame);

// Lyapunov functional
//   alpha = vperp^2/2 - phi - (sum_i w_i^2 b_i / m_i) xperp,
// nonnegative when phi <= 0, comparable to xperp + vperp^2 near the wall and
// exactly zero on the grazing set.
double lyapunov_alpha(const LocalPhase& lp, double phi_at_point);

struct AlphaRatioReport {
  double alpha_min = 0.0;
  double alpha_max = 0.0;
  double alpha_ratio = 0.0;
  double ssd_min = 0.0;   // extremes of xperp + vperp^2
  double ssd_max = 0.0;
  double ssd_ratio = 0.0;
  bool band_exit = false; // trajectory left the tubular band; report truncated
  double exit_time = 0.0;
  int samples_used = 0;
};

// Extremes and two-sided comparability ratio of alpha and xperp + vperp^2
// along an in-band trajectory.
AlphaRatioReport velocity_lemma_ratio(std::span<const TrajectorySample> samples);

struct AlphaDriftReport {
  double max_quotient = 0.0;  // max |d alpha/dt| / (alpha (1 + |log alpha|))
  double mean_quotient = 0.0;
  int points = 0;
};

// Central-difference d(alpha)/dt along smooth arcs between reflections,
// normalized by alpha (1 + |log alpha|). Samples straddling a reflection are
// excluded; alpha must stay positive on the arcs used.
AlphaDriftReport dalpha_dt_check(std::span<const TrajectorySample> samples,
                                 std::span<const ReflectionEvent> events);

}  // namespace vp
