#include "vp/dynamics.hpp"

#include <cmath>

#include "vp/errors.hpp"
#include "vp/lyapunov.hpp"

namespace vp {

namespace {

// Position of the provisional sub-step of size tau started from (x, v) under
// the frozen acceleration E0 (the drift segment of a kick-drift-kick step).
inline Vec3 substep_position(const Vec3& x, const Vec3& v, const Vec3& E0, double tau) {
  return x + v * tau + E0 * (0.5 * tau * tau);
}

}  // namespace

PhaseState advance(PhaseState state, const FieldSource& field, const ConvexDomain& domain,
                   double dt, std::vector<ReflectionEvent>* events) {
  if (!(dt > 0.0)) throw Error("advance: dt must be positive");
  const double wall_tol = domain.position_tol();

  double remaining = dt;
  Vec3 x = state.X;
  Vec3 v = state.V;
  int bounces = 0;

  while (remaining > 0.0) {
    const Vec3 E0 = field.field_at(x);
    const Vec3 vh = v + E0 * (0.5 * remaining);
    const Vec3 xp = x + vh * remaining;

    if (domain.phi(xp) < 0.0) {
      v = vh + field.field_at(xp) * (0.5 * remaining);
      x = xp;
      state.s += remaining;
      break;
    }

    // exit: bracket the first sign change over a few sub-intervals, then
    // bisect the crossing time on the drift parabola
    double lo = 0.0, hi = remaining;
    const int scan = 8;
    for (int i = 1; i <= scan; ++i) {
      const double t = remaining * i / scan;
      if (domain.phi(substep_position(x, v, E0, t)) >= 0.0) {
        hi = t;
        lo = remaining * (i - 1) / scan;
        break;
      }
    }
    for (int it = 0; it < 60; ++it) {
      const double mid = 0.5 * (lo + hi);
      const Vec3 pm = substep_position(x, v, E0, mid);
      const double ph = domain.phi(pm);
      if (std::abs(ph) / std::max(norm(domain.grad(pm)), 1e-30) <= wall_tol) {
        lo = hi = mid;
        break;
      }
      (ph < 0.0 ? lo : hi) = mid;
    }
    const double tau = 0.5 * (lo + hi);

    // complete the Verlet sub-step of size tau at the wall
    const Vec3 vh2 = v + E0 * (0.5 * tau);
    Vec3 xw = substep_position(x, v, E0, tau);
    const Vec3 v_in = vh2 + field.field_at(xw) * (0.5 * tau);
    const Vec3 n = normalized(domain.grad(xw));

    state.s += tau;
    remaining -= tau;

    if (dot(v_in, n) > 0.0) {
      const Vec3 v_out = specular_reflect(v_in, n);
      if (events) {
        ReflectionEvent ev;
        ev.s = state.s;
        ev.point = xw;
        ev.v_in = v_in;
        ev.v_out = v_out;
        ev.normal = n;
        ev.grazing = std::abs(dot(v_in, n)) / std::max(norm(v_in), 1e-300);
        events->push_back(ev);
      }
      v = v_out;
      ++state.reflections;
    } else {
      // located the wall while already moving inward (re-detection of a
      // fresh reflection point); keep the velocity
      v = v_in;
    }
    // restart strictly inside so the next bracket sees phi < 0
    x = xw - n * (8.0 * wall_tol);

    if (++bounces > 64)
      throw StuckAtBoundary("advance: more than 64 reflections in one step");
  }

  state.X = x;
  state.V = v;
  return state;
}

std::vector<TrajectorySample> integrate_trajectory(PhaseState start, const FieldSource& field,
                                                   const ConvexDomain& domain, double dt,
                                                   long steps,
                                                   std::vector<ReflectionEvent>* events) {
  std::vector<TrajectorySample> out;
  out.reserve(steps + 1);

  const auto record = [&](const PhaseState& st) {
    TrajectorySample smp;
    smp.s = st.s;
    smp.state = st;
    try {
      const LocalPhase lp = to_local(st.X, st.V, domain);
      smp.in_band = true;
      smp.xperp = lp.xperp;
      smp.vperp = lp.vperp;
      smp.w2 = lp.tangential_speed2();
      smp.ssd = lp.xperp + lp.vperp * lp.vperp;
      smp.alpha = lyapunov_alpha(lp, field.potential_at(st.X));
    } catch (const AmbiguousProjection&) {
      smp.in_band = false;
    }
    out.push_back(smp);
  };

  record(start);
  PhaseState st = start;
  for (long k = 0; k < steps; ++k) {
    st = advance(st, field, domain, dt, events);
    record(st);
  }
  return out;
}

}  // namespace vp
