#pragma once
#include <utility>

#include "vp/domain.hpp"
#include "vp/vec3.hpp"

namespace vp {

// Boundary-adapted frame at the closest boundary point of a query:
// outward unit normal, orthonormal principal tangent directions, principal
// curvatures k_i >= 0 (eigenvalues of the shape operator dn), second
// fundamental form coefficients b_i = -k_i <= 0 in this frame, and the
// Christoffel symbols of the Monge chart anchored at the point (which vanish
// at the chart origin).
//
// A point at wall distance d sits at  x = point - d * normal,  and the
// tangent metric seen from there is scaled by metric_factor(i, d) = 1 - k_i*d
// per principal direction. Frames are only valid while both factors stay
// positive, which the tubular width 0.5/max_k guarantees.
struct BoundaryFrame {
  Vec3 point{};          // closest boundary point
  double mu[2] = {0.0, 0.0};  // chart coordinates of `point` (origin of its own chart)
  double wall_distance = 0.0; // x_perp of the query that produced the frame
  Vec3 normal{};         // outward unit normal
  Vec3 tangent[2] = {};  // orthonormal principal directions
  double curvature[2] = {0.0, 0.0};     // k_i >= 0
  double second_form[2] = {0.0, 0.0};   // b_i = -k_i <= 0
  double christoffel[2][2][2] = {};     // gamma^i_{jl}, zero at the chart origin

  double metric_factor(int i, double xperp) const { return 1.0 - curvature[i] * xperp; }
};

// Phase coordinates relative to a boundary frame: chart coordinates mu,
// wall distance xperp >= 0, tangential velocity components w in the frame's
// principal basis, and vperp = d(xperp)/dt (positive when moving away from
// the wall). Carries its anchoring frame so the map back to Cartesian is
// well defined.
struct LocalPhase {
  double mu[2] = {0.0, 0.0};
  double xperp = 0.0;
  double w[2] = {0.0, 0.0};
  double vperp = 0.0;
  BoundaryFrame frame{};

  double tangential_speed2() const { return w[0] * w[0] + w[1] * w[1]; }
};

// Unique closest-point projection with full frame data. Requires the query
// inside the closure of the domain and within the tubular neighborhood;
// throws OutsideDomain / AmbiguousProjection otherwise.
BoundaryFrame project_to_boundary(const Vec3& x, const ConvexDomain& domain);

// Frame at a point already on the boundary (within boundary tolerance).
BoundaryFrame surface_frame(const Vec3& boundary_point, const ConvexDomain& domain);

LocalPhase to_local(const Vec3& x, const Vec3& v, const ConvexDomain& domain);
std::pair<Vec3, Vec3> from_local(const LocalPhase& lp, const ConvexDomain& domain);

// xperp + vperp^2: the standard equivalence class for the distance to the
// grazing set {x on boundary, v tangent}. Exactly zero on that set.
double singular_set_distance(const Vec3& x, const Vec3& v, const ConvexDomain& domain);

}  // namespace vp
