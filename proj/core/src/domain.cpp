#include "vp/domain.hpp"

#include <algorithm>
#include <cmath>

#include "vp/errors.hpp"
#include "vp/frame.hpp"
#include "vp/util.hpp"

namespace vp {

namespace {

double ipow(double x, int p) {
  double r = 1.0;
  for (int i = 0; i < p; ++i) r *= x;
  return r;
}

}  // namespace

ConvexDomain ConvexDomain::ball(const Vec3& center, double radius) {
  ConvexDomain d;
  d.kind_ = DomainKind::ball;
  d.center_ = center;
  d.radius_ = radius;
  d.finalize();
  return d;
}

ConvexDomain ConvexDomain::ellipsoid(const Vec3& center, const Vec3& semi_axes) {
  ConvexDomain d;
  d.kind_ = DomainKind::ellipsoid;
  d.center_ = center;
  d.axes_ = semi_axes;
  d.finalize();
  return d;
}

ConvexDomain ConvexDomain::level_set(const Vec3& center, std::vector<LevelSetTerm> terms) {
  ConvexDomain d;
  d.kind_ = DomainKind::level_set;
  d.center_ = center;
  d.terms_ = std::move(terms);
  d.finalize();
  return d;
}

double ConvexDomain::phi(const Vec3& x) const {
  const Vec3 r = x - center_;
  switch (kind_) {
    case DomainKind::ball:
      return norm2(r) - radius_ * radius_;
    case DomainKind::ellipsoid: {
      const double u = r.x / axes_.x, v = r.y / axes_.y, w = r.z / axes_.z;
      return u * u + v * v + w * w - 1.0;
    }
    case DomainKind::level_set: {
      double s = -1.0;
      for (const auto& t : terms_)
        s += t.coef * ipow(r.x, t.powers[0]) * ipow(r.y, t.powers[1]) * ipow(r.z, t.powers[2]);
      return s;
    }
  }
  return 0.0;
}

Vec3 ConvexDomain::grad(const Vec3& x) const {
  const Vec3 r = x - center_;
  switch (kind_) {
    case DomainKind::ball:
      return r * 2.0;
    case DomainKind::ellipsoid:
      return {2.0 * r.x / (axes_.x * axes_.x), 2.0 * r.y / (axes_.y * axes_.y),
              2.0 * r.z / (axes_.z * axes_.z)};
    case DomainKind::level_set: {
      Vec3 g{};
      for (const auto& t : terms_) {
        const double px = ipow(r.x, t.powers[0]);
        const double py = ipow(r.y, t.powers[1]);
        const double pz = ipow(r.z, t.powers[2]);
        if (t.powers[0] > 0) g.x += t.coef * t.powers[0] * ipow(r.x, t.powers[0] - 1) * py * pz;
        if (t.powers[1] > 0) g.y += t.coef * t.powers[1] * px * ipow(r.y, t.powers[1] - 1) * pz;
        if (t.powers[2] > 0) g.z += t.coef * t.powers[2] * px * py * ipow(r.z, t.powers[2] - 1);
      }
      return g;
    }
  }
  return {};
}

Mat3 ConvexDomain::hessian(const Vec3& x) const {
  const Vec3 r = x - center_;
  Mat3 h{};
  switch (kind_) {
    case DomainKind::ball:
      h = Mat3::identity() * 2.0;
      return h;
    case DomainKind::ellipsoid:
      h(0, 0) = 2.0 / (axes_.x * axes_.x);
      h(1, 1) = 2.0 / (axes_.y * axes_.y);
      h(2, 2) = 2.0 / (axes_.z * axes_.z);
      return h;
    case DomainKind::level_set: {
      for (const auto& t : terms_) {
        const int p0 = t.powers[0], p1 = t.powers[1], p2 = t.powers[2];
        const double x0 = r.x, x1 = r.y, x2 = r.z;
        // diagonal
        if (p0 > 1) h(0, 0) += t.coef * p0 * (p0 - 1) * ipow(x0, p0 - 2) * ipow(x1, p1) * ipow(x2, p2);
        if (p1 > 1) h(1, 1) += t.coef * p1 * (p1 - 1) * ipow(x0, p0) * ipow(x1, p1 - 2) * ipow(x2, p2);
        if (p2 > 1) h(2, 2) += t.coef * p2 * (p2 - 1) * ipow(x0, p0) * ipow(x1, p1) * ipow(x2, p2 - 2);
        // mixed
        if (p0 > 0 && p1 > 0) {
          const double v = t.coef * p0 * p1 * ipow(x0, p0 - 1) * ipow(x1, p1 - 1) * ipow(x2, p2);
          h(0, 1) += v;
          h(1, 0) += v;
        }
        if (p0 > 0 && p2 > 0) {
          const double v = t.coef * p0 * p2 * ipow(x0, p0 - 1) * ipow(x1, p1) * ipow(x2, p2 - 1);
          h(0, 2) += v;
          h(2, 0) += v;
        }
        if (p1 > 0 && p2 > 0) {
          const double v = t.coef * p1 * p2 * ipow(x0, p0) * ipow(x1, p1 - 1) * ipow(x2, p2 - 1);
          h(1, 2) += v;
          h(2, 1) += v;
        }
      }
      return h;
    }
  }
  return h;
}

bool ConvexDomain::on_boundary(const Vec3& x, double tol_scale) const {
  const double g = norm(grad(x));
  if (g < 1e-300) return false;
  return std::abs(phi(x)) / g <= tol_scale * diameter_;
}

Vec3 ConvexDomain::boundary_point(const Vec3& direction) const {
  const Vec3 dir = normalized(direction);
  if (kind_ == DomainKind::ball) return center_ + dir * radius_;
  // bracket the root of phi along the ray, then bisect + polish
  double lo = 0.0;
  double hi = 0.25 * diameter_;
  int guard = 0;
  while (phi(center_ + dir * hi) < 0.0) {
    lo = hi;
    hi *= 2.0;
    if (++guard > 60) throw DegenerateFrame("boundary_point: ray never leaves the domain");
  }
  for (int i = 0; i < 80; ++i) {
    const double mid = 0.5 * (lo + hi);
    (phi(center_ + dir * mid) < 0.0 ? lo : hi) = mid;
  }
  double s = 0.5 * (lo + hi);
  for (int i = 0; i < 4; ++i) {  // Newton polish along the ray
    const Vec3 p = center_ + dir * s;
    const double dphi = dot(grad(p), dir);
    if (std::abs(dphi) < 1e-300) break;
    s -= phi(p) / dphi;
  }
  return center_ + dir * s;
}

void ConvexDomain::finalize() {
  switch (kind_) {
    case DomainKind::ball: {
      const Vec3 r{radius_, radius_, radius_};
      bbox_lo_ = center_ - r;
      bbox_hi_ = center_ + r;
      diameter_ = 2.0 * radius_;
      max_curvature_ = 1.0 / radius_;
      break;
    }
    case DomainKind::ellipsoid: {
      bbox_lo_ = center_ - axes_;
      bbox_hi_ = center_ + axes_;
      const double amax = std::max({axes_.x, axes_.y, axes_.z});
      const double amin = std::min({axes_.x, axes_.y, axes_.z});
      diameter_ = 2.0 * amax;
      max_curvature_ = amax / (amin * amin);  // attained at the major-axis vertex
      break;
    }
    case DomainKind::level_set: {
      // Sample the boundary to estimate extent and the curvature bound.
      diameter_ = 1.0;  // provisional scale so boundary_point can run
      const int n = 2048;
      Vec3 lo{1e300, 1e300, 1e300}, hi{-1e300, -1e300, -1e300};
      double rmax = 0.0;
      std::vector<Vec3> pts;
      pts.reserve(n);
      for (int i = 0; i < n; ++i) {
        const Vec3 p = boundary_point(fibonacci_sphere(i, n));
        pts.push_back(p);
        rmax = std::max(rmax, norm(p - center_));
        for (int a = 0; a < 3; ++a) {
          lo[a] = std::min(lo[a], p[a]);
          hi[a] = std::max(hi[a], p[a]);
        }
      }
      const Vec3 pad = (hi - lo) * 0.01;
      bbox_lo_ = lo - pad;
      bbox_hi_ = hi + pad;
      diameter_ = 2.0 * rmax;
      double kmax = 0.0;
      for (const auto& p : pts) {
        const BoundaryFrame f = surface_frame(p, *this);
        kmax = std::max({kmax, f.curvature[0], f.curvature[1]});
      }
      max_curvature_ = std::max(kmax, 1e-12);
      break;
    }
  }
  tubular_width_ = 0.5 / max_curvature_;
}

}  // namespace vp
