#pragma once
#include <array>
#include <vector>

#include "vp/vec3.hpp"

namespace vp {

enum class DomainKind { ball, ellipsoid, level_set };

// One monomial of a generic convex level-set: coef * prod_i (x_i - c_i)^p_i.
struct LevelSetTerm {
  double coef = 1.0;
  std::array<int, 3> powers{0, 0, 0};
};

// Smooth bounded convex domain given implicitly by phi < 0 inside, phi = 0 on
// the boundary. The gradient points outward everywhere near the boundary.
//
// Three kinds are supported: balls and axis-aligned ellipsoids (closed-form
// projection data available where it matters), and generic even-power
// level sets phi = sum_k coef_k * prod (x_i-c_i)^p_i - 1, convexity being the
// caller's obligation (and checked by the test batteries).
class ConvexDomain {
 public:
  static ConvexDomain ball(const Vec3& center, double radius);
  static ConvexDomain ellipsoid(const Vec3& center, const Vec3& semi_axes);
  static ConvexDomain level_set(const Vec3& center, std::vector<LevelSetTerm> terms);

  DomainKind kind() const { return kind_; }
  const Vec3& center() const { return center_; }
  double radius() const { return radius_; }
  const Vec3& semi_axes() const { return axes_; }

  double phi(const Vec3& x) const;
  Vec3 grad(const Vec3& x) const;
  Mat3 hessian(const Vec3& x) const;

  bool inside(const Vec3& x) const { return phi(x) < 0.0; }
  // |phi| below this counts as "on the boundary" for classification purposes.
  bool on_boundary(const Vec3& x, double tol_scale = 1e-10) const;

  double diameter() const { return diameter_; }          // L
  double tubular_width() const { return tubular_width_; }  // 0.5 / max curvature
  double max_curvature() const { return max_curvature_; }
  std::array<Vec3, 2> bounding_box() const { return {bbox_lo_, bbox_hi_}; }

  // Boundary point hit by the ray from the center along `direction`.
  Vec3 boundary_point(const Vec3& direction) const;

  // Distance scale used by root finders and projections: 1e-12 * L.
  double position_tol() const { return 1e-12 * diameter_; }

 private:
  ConvexDomain() = default;
  void finalize();  // bbox, diameter, curvature bound, tubular width

  DomainKind kind_ = DomainKind::ball;
  Vec3 center_{};
  double radius_ = 1.0;
  Vec3 axes_{1.0, 1.0, 1.0};
  std::vector<LevelSetTerm> terms_;

  Vec3 bbox_lo_{}, bbox_hi_{};
  double diameter_ = 2.0;
  double max_curvature_ = 1.0;
  double tubular_width_ = 0.5;
};

}  // namespace vp
