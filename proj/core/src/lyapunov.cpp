#include "vp/lyapunov.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "vp/errors.hpp"

namespace vp {

LocalDerivs local_rhs(const LocalPhase& lp, const FieldSample& sample,
                      const BoundaryFrame& frame) {
  double m[2];
  for (int i = 0; i < 2; ++i) {
    m[i] = frame.metric_factor(i, lp.xperp);
    if (m[i] <= 0.0) throw FrameInvalid("local_rhs: metric factor not positive");
  }

  LocalDerivs d;
  d.dxperp = lp.vperp;

  double F = sample.E_perp;
  for (int j = 0; j < 2; ++j) F += lp.w[j] * lp.w[j] * frame.second_form[j] / m[j];
  d.dvperp = F;

  for (int i = 0; i < 2; ++i) {
    d.dmu[i] = lp.w[i] / m[i];
    // signed curvature in the metric convention: k^- = -k_i
    double sigma = sample.E_tan[i] + lp.vperp * lp.w[i] * frame.curvature[i] / m[i];
    for (int j = 0; j < 2; ++j)
      for (int l = 0; l < 2; ++l)
        sigma -= frame.christoffel[i][j][l] * lp.w[j] * lp.w[l] / m[j];
    d.dw[i] = sigma;
  }
  return d;
}

double normal_acceleration(const LocalPhase& lp, const FieldSample& sample,
                           const BoundaryFrame& frame) {
  double F = sample.E_perp;
  for (int j = 0; j < 2; ++j) {
    const double m = frame.metric_factor(j, lp.xperp);
    if (m <= 0.0) throw FrameInvalid("normal_acceleration: metric factor not positive");
    F += lp.w[j] * lp.w[j] * frame.second_form[j] / m;
  }
  return F;
}

double lyapunov_alpha(const LocalPhase& lp, double phi_at_point) {
  double curvature_term = 0.0;
  for (int i = 0; i < 2; ++i) {
    const double m = lp.frame.metric_factor(i, lp.xperp);
    if (m <= 0.0) throw FrameInvalid("lyapunov_alpha: metric factor not positive");
    curvature_term += lp.w[i] * lp.w[i] * lp.frame.second_form[i] / m;
  }
  return 0.5 * lp.vperp * lp.vperp - phi_at_point - curvature_term * lp.xperp;
}

AlphaRatioReport velocity_lemma_ratio(std::span<const TrajectorySample> samples) {
  AlphaRatioReport rep;
  rep.alpha_min = rep.ssd_min = 1e300;
  rep.alpha_max = rep.ssd_max = -1e300;
  for (const auto& s : samples) {
    if (!s.in_band) {
      rep.band_exit = true;
      rep.exit_time = s.s;
      break;
    }
    rep.alpha_min = std::min(rep.alpha_min, s.alpha);
    rep.alpha_max = std::max(rep.alpha_max, s.alpha);
    rep.ssd_min = std::min(rep.ssd_min, s.ssd);
    rep.ssd_max = std::max(rep.ssd_max, s.ssd);
    ++rep.samples_used;
  }
  if (rep.samples_used == 0) {
    rep.alpha_min = rep.alpha_max = rep.ssd_min = rep.ssd_max = 0.0;
    return rep;
  }
  rep.alpha_ratio = rep.alpha_min > 0.0 ? rep.alpha_max / rep.alpha_min
                                        : std::numeric_limits<double>::infinity();
  rep.ssd_ratio = rep.ssd_min > 0.0 ? rep.ssd_max / rep.ssd_min
                                    : std::numeric_limits<double>::infinity();
  return rep;
}

AlphaDriftReport dalpha_dt_check(std::span<const TrajectorySample> samples,
                                 std::span<const ReflectionEvent> events) {
  AlphaDriftReport rep;
  double sum = 0.0;
  std::size_t ev = 0;
  for (std::size_t k = 1; k + 1 < samples.size(); ++k) {
    const auto& prev = samples[k - 1];
    const auto& cur = samples[k];
    const auto& next = samples[k + 1];
    if (!prev.in_band || !cur.in_band || !next.in_band) continue;

    // skip stencils that straddle a reflection; alpha is continuous there
    // but not differentiable
    while (ev < events.size() && events[ev].s < prev.s) ++ev;
    if (ev < events.size() && events[ev].s <= next.s) continue;

    if (!(cur.alpha > 0.0)) continue;
    const double dalpha = (next.alpha - prev.alpha) / (next.s - prev.s);
    const double q = std::abs(dalpha) / (cur.alpha * (1.0 + std::abs(std::log(cur.alpha))));
    rep.max_quotient = std::max(rep.max_quotient, q);
    sum += q;
    ++rep.points;
  }
  rep.mean_quotient = rep.points > 0 ? sum / rep.points : 0.0;
  return rep;
}

}  // namespace vp
