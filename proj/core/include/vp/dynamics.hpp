#pragma once
#include <vector>

#include "vp/frame.hpp"
#include "vp/poisson.hpp"

namespace vp {

// One characteristic's state: position, velocity, elapsed time and the number
// of wall reflections so far. X stays in the closure of the domain.
struct PhaseState {
  Vec3 X{};
  Vec3 V{};
  double s = 0.0;
  long reflections = 0;
};

struct ReflectionEvent {
  double s = 0.0;       // event time
  Vec3 point{};         // impact point on the boundary
  Vec3 v_in{};
  Vec3 v_out{};
  Vec3 normal{};        // outward unit normal at impact
  double grazing = 0.0; // |v_in . n| / |v_in|
};

// v - 2 (v.n) n; an involution that preserves |v| and the tangential part.
inline Vec3 specular_reflect(const Vec3& v, const Vec3& n) {
  return v - n * (2.0 * dot(v, n));
}

// One velocity-Verlet step of size dt with embedded wall handling: if the
// provisional step leaves the domain, the crossing is located by bisection on
// phi to |phi| <= 1e-12 L, the sub-step is completed at the wall, the velocity
// reflected, and the remainder of dt resumed. Throws StuckAtBoundary after 64
// reflections within one call.
PhaseState advance(PhaseState state, const FieldSource& field, const ConvexDomain& domain,
                   double dt, std::vector<ReflectionEvent>* events = nullptr);

// Per-step record along a trajectory; local quantities are filled only while
// the point is inside the tubular neighborhood.
struct TrajectorySample {
  double s = 0.0;
  PhaseState state{};
  bool in_band = false;
  double xperp = 0.0;
  double vperp = 0.0;
  double w2 = 0.0;      // squared tangential speed
  double alpha = 0.0;   // Lyapunov functional (see lyapunov.hpp)
  double ssd = 0.0;     // xperp + vperp^2
};

std::vector<TrajectorySample> integrate_trajectory(PhaseState start, const FieldSource& field,
                                                   const ConvexDomain& domain, double dt,
                                                   long steps,
                                                   std::vector<ReflectionEvent>* events = nullptr);

}  // namespace vp
