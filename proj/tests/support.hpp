#pragma once
// Shared fixtures and independent oracles for the test suites.
#include <cmath>
#include <vector>

#include "vp/domain.hpp"
#include "vp/frame.hpp"
#include "vp/util.hpp"

namespace vptest {

using namespace vp;

inline ConvexDomain unit_ball() { return ConvexDomain::ball({0, 0, 0}, 1.0); }

inline ConvexDomain ellipsoid211() {
  return ConvexDomain::ellipsoid({0, 0, 0}, {2.0, 1.0, 1.0});
}

// rounded box |x/a|^4 sum = 1; smooth, convex, non-quadric
inline ConvexDomain superellipsoid() {
  std::vector<LevelSetTerm> terms;
  terms.push_back({1.0 / std::pow(1.2, 4), {4, 0, 0}});
  terms.push_back({1.0, {0, 4, 0}});
  terms.push_back({1.0 / std::pow(0.9, 4), {0, 0, 4}});
  return ConvexDomain::level_set({0, 0, 0}, terms);
}

struct Rng {
  uint64_t state;
  explicit Rng(uint64_t seed) : state(seed) {}
  double uniform() { return splitmix64(state) * 0x1.0p-64; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  Vec3 vec(double lo, double hi) { return {uniform(lo, hi), uniform(lo, hi), uniform(lo, hi)}; }
  Vec3 unit() {
    // rejection-free: normalize a gaussian-ish triple via Box-Muller pairs
    const double u1 = uniform(), u2 = uniform(), u3 = uniform(), u4 = uniform();
    const double g1 = std::sqrt(-2.0 * std::log(u1 + 1e-18)) * std::cos(2.0 * M_PI * u2);
    const double g2 = std::sqrt(-2.0 * std::log(u1 + 1e-18)) * std::sin(2.0 * M_PI * u2);
    const double g3 = std::sqrt(-2.0 * std::log(u3 + 1e-18)) * std::cos(2.0 * M_PI * u4);
    return normalized(Vec3{g1, g2, g3});
  }
};

// Independent closest-point oracle: global argmin over a dense boundary
// sample followed by derivative-free cone refinement. Never calls the
// module's projection.
inline Vec3 closest_point_oracle(const Vec3& x, const ConvexDomain& dom, int coarse = 200000) {
  Vec3 best_dir{1, 0, 0};
  double best_d2 = 1e300;
  for (int i = 0; i < coarse; ++i) {
    const Vec3 dir = fibonacci_sphere(i, coarse);
    const Vec3 p = dom.boundary_point(dir);
    const double d2 = norm2(p - x);
    if (d2 < best_d2) {
      best_d2 = d2;
      best_dir = dir;
    }
  }
  // refine: shrink a local direction cone around the incumbent
  double cone = 0.02;
  for (int round = 0; round < 40; ++round) {
    Vec3 t1, t2;
    const Vec3 n = normalized(best_dir);
    t1 = std::abs(n.x) < 0.9 ? normalized(cross(n, {1, 0, 0})) : normalized(cross(n, {0, 1, 0}));
    t2 = cross(n, t1);
    bool improved = false;
    for (int a = -2; a <= 2; ++a)
      for (int b = -2; b <= 2; ++b) {
        if (a == 0 && b == 0) continue;
        const Vec3 dir = normalized(n + t1 * (cone * a / 2.0) + t2 * (cone * b / 2.0));
        const Vec3 p = dom.boundary_point(dir);
        const double d2 = norm2(p - x);
        if (d2 < best_d2) {
          best_d2 = d2;
          best_dir = dir;
          improved = true;
        }
      }
    if (!improved) cone *= 0.35;
    if (cone < 1e-12) break;
  }
  return dom.boundary_point(best_dir);
}

// Finite-difference shape operator along a tangent direction: the derivative
// of the outward unit normal along the surface.
inline double fd_normal_curvature(const ConvexDomain& dom, const Vec3& p, const Vec3& u,
                                  double h = 1e-5) {
  const auto unit_normal = [&](const Vec3& q) { return normalized(dom.grad(q)); };
  const auto on_surface = [&](const Vec3& q) {
    // pull the perturbed point back onto the level set along the gradient
    Vec3 y = q;
    for (int i = 0; i < 8; ++i) {
      const Vec3 g = dom.grad(y);
      y -= g * (dom.phi(y) / norm2(g));
    }
    return y;
  };
  const Vec3 np = unit_normal(on_surface(p + u * h));
  const Vec3 nm = unit_normal(on_surface(p - u * h));
  return dot((np - nm) / (2.0 * h), u);
}

}  // namespace vptest
