#include "vp/frame.hpp"

#include <algorithm>
#include <cmath>

#include "vp/errors.hpp"

namespace vp {

namespace {

// Deterministic orthonormal tangent pair: Gram-Schmidt of the global axis
// least aligned with n. Also the umbilic tie-breaking rule.
void seed_tangents(const Vec3& n, Vec3& t1, Vec3& t2) {
  const double ax = std::abs(n.x), ay = std::abs(n.y), az = std::abs(n.z);
  Vec3 e{1.0, 0.0, 0.0};
  if (ay <= ax && ay <= az) e = {0.0, 1.0, 0.0};
  else if (az <= ax && az <= ay) e = {0.0, 0.0, 1.0};
  t1 = normalized(e - n * dot(e, n));
  t2 = cross(n, t1);
}

// Closest boundary point of x by Newton on the stationarity system
//   y - x - lambda * grad(y) = 0,  phi(y) = 0,
// seeded by a ray march from x along the outward gradient direction.
Vec3 newton_project(const Vec3& x, const ConvexDomain& dom) {
  const double tol = dom.position_tol();

  Vec3 g = dom.grad(x);
  const double gn = norm(g);
  if (gn < 1e-300) throw AmbiguousProjection("projection: vanishing gradient at query");
  const Vec3 dir = g / gn;

  // march to a bracketing point outside, then bisect onto the surface
  double lo = 0.0;
  double hi = std::max(1e-6 * dom.diameter(), -dom.phi(x) / std::max(gn, 1e-30));
  int guard = 0;
  while (dom.phi(x + dir * hi) < 0.0) {
    lo = hi;
    hi *= 2.0;
    if (++guard > 64) throw AmbiguousProjection("projection: seed march failed");
  }
  for (int i = 0; i < 60; ++i) {
    const double mid = 0.5 * (lo + hi);
    (dom.phi(x + dir * mid) < 0.0 ? lo : hi) = mid;
  }
  Vec3 y = x + dir * (0.5 * (lo + hi));
  double lambda = norm(y - x) / std::max(norm(dom.grad(y)), 1e-30);

  for (int it = 0; it < 50; ++it) {
    const Vec3 gy = dom.grad(y);
    const Mat3 H = dom.hessian(y);
    const Vec3 f = y - x - gy * lambda;
    const double fphi = dom.phi(y);

    const double gyn = std::max(norm(gy), 1e-30);
    if (norm(f) <= tol && std::abs(fphi) / gyn <= tol) break;

    std::array<std::array<double, 4>, 4> J{};
    std::array<double, 4> rhs{-f.x, -f.y, -f.z, -fphi};
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) J[i][j] = (i == j ? 1.0 : 0.0) - lambda * H(i, j);
      J[i][3] = -gy[i];
      J[3][i] = gy[i];
    }
    J[3][3] = 0.0;
    if (!solve_dense<4>(J, rhs))
      throw AmbiguousProjection("projection: singular Newton system");
    y += Vec3{rhs[0], rhs[1], rhs[2]};
    lambda += rhs[3];
  }

  const Vec3 gy = dom.grad(y);
  const double gyn = std::max(norm(gy), 1e-30);
  if (std::abs(dom.phi(y)) / gyn > 64.0 * tol)
    throw AmbiguousProjection("projection: Newton did not land on the boundary");
  return y;
}

}  // namespace

BoundaryFrame surface_frame(const Vec3& p, const ConvexDomain& dom) {
  const Vec3 g = dom.grad(p);
  const double gn = norm(g);
  if (gn < 1e-12 / dom.diameter()) throw DegenerateFrame("surface_frame: vanishing gradient");
  const Vec3 n = g / gn;

  Vec3 t1, t2;
  seed_tangents(n, t1, t2);

  // Shape operator restricted to the tangent plane: S_ab = t_a . H t_b / |g|.
  // Symmetric 2x2; eigenvalues are the principal curvatures (>= 0 for a
  // convex interior with outward n), eigenvectors the principal directions.
  const Mat3 H = dom.hessian(p);
  const Vec3 Ht1 = H * t1;
  const Vec3 Ht2 = H * t2;
  const double s11 = dot(t1, Ht1) / gn;
  const double s12 = dot(t1, Ht2) / gn;
  const double s22 = dot(t2, Ht2) / gn;

  const double mid = 0.5 * (s11 + s22);
  const double half_diff = 0.5 * (s11 - s22);
  const double r = std::hypot(half_diff, s12);
  double k1 = mid + r;
  double k2 = mid - r;

  BoundaryFrame fr;
  fr.point = p;
  fr.normal = n;

  const double kscale = std::max({std::abs(k1), std::abs(k2), 1e-30});
  if (r < 1e-8 * kscale) {
    // umbilic: any orthonormal pair works; keep the deterministic seed
    fr.tangent[0] = t1;
    fr.tangent[1] = t2;
  } else {
    // eigenvector of the larger eigenvalue in the (t1, t2) basis
    double c, s;
    if (std::abs(s12) > 1e-300) {
      c = s12;
      s = k1 - s11;
    } else {
      c = (s11 >= s22) ? 1.0 : 0.0;
      s = (s11 >= s22) ? 0.0 : 1.0;
    }
    const double nrm = std::hypot(c, s);
    c /= nrm;
    s /= nrm;
    Vec3 u1 = t1 * c + t2 * s;
    if (dot(u1, t1) < 0.0) u1 = -u1;  // deterministic orientation
    fr.tangent[0] = normalized(u1);
    fr.tangent[1] = cross(n, fr.tangent[0]);
  }

  fr.curvature[0] = std::max(k1, 0.0);
  fr.curvature[1] = std::max(k2, 0.0);
  fr.second_form[0] = -fr.curvature[0];
  fr.second_form[1] = -fr.curvature[1];
  // Monge chart over the tangent plane at p: the metric is flat to first
  // order at the origin, so every christoffel symbol vanishes there.
  return fr;
}

BoundaryFrame project_to_boundary(const Vec3& x, const ConvexDomain& dom) {
  const double tol = dom.position_tol();
  const double phix = dom.phi(x);
  const double gn = norm(dom.grad(x));

  // strictly outside is an error; a thin shell around the boundary projects
  // onto itself so that wall impacts located to |phi| <= 1e-12 L get frames
  if (gn > 1e-300 && phix / gn > 64.0 * tol)
    throw OutsideDomain("project_to_boundary: query outside the domain");
  if (gn > 1e-300 && std::abs(phix) / gn <= 64.0 * tol) {
    BoundaryFrame fr = surface_frame(newton_project(x, dom), dom);
    fr.wall_distance = 0.0;
    return fr;
  }
  if (phix >= 0.0) throw OutsideDomain("project_to_boundary: query outside the domain");

  Vec3 y;
  if (dom.kind() == DomainKind::ball) {
    const Vec3 d = x - dom.center();
    const double r = norm(d);
    if (r < 16.0 * tol)
      throw AmbiguousProjection("project_to_boundary: query at the center");
    y = dom.center() + d * (dom.radius() / r);
  } else {
    y = newton_project(x, dom);
  }

  const double xperp = norm(x - y);
  if (xperp > dom.tubular_width())
    throw AmbiguousProjection("project_to_boundary: outside the tubular neighborhood");

  BoundaryFrame fr = surface_frame(y, dom);
  fr.wall_distance = xperp;

  // reconstruction check: x must equal point - xperp * n
  const Vec3 back = fr.point - fr.normal * xperp;
  if (norm(back - x) > 1e4 * tol)
    throw AmbiguousProjection("project_to_boundary: projection inconsistent with normal ray");
  return fr;
}

LocalPhase to_local(const Vec3& x, const Vec3& v, const ConvexDomain& dom) {
  LocalPhase lp;
  lp.frame = project_to_boundary(x, dom);
  lp.xperp = lp.frame.wall_distance;
  lp.w[0] = dot(v, lp.frame.tangent[0]);
  lp.w[1] = dot(v, lp.frame.tangent[1]);
  lp.vperp = -dot(v, lp.frame.normal);
  return lp;
}

std::pair<Vec3, Vec3> from_local(const LocalPhase& lp, const ConvexDomain& dom) {
  const BoundaryFrame& f = lp.frame;
  Vec3 base = f.point;
  if (std::abs(lp.mu[0]) + std::abs(lp.mu[1]) > 0.0) {
    // second-order Monge chart step away from the anchor, polished back on
    const double height =
        0.5 * (f.curvature[0] * lp.mu[0] * lp.mu[0] + f.curvature[1] * lp.mu[1] * lp.mu[1]);
    const Vec3 guess =
        f.point + f.tangent[0] * lp.mu[0] + f.tangent[1] * lp.mu[1] - f.normal * height;
    base = dom.boundary_point(guess - dom.center());
  }
  const BoundaryFrame fb = (std::abs(lp.mu[0]) + std::abs(lp.mu[1]) > 0.0)
                               ? surface_frame(base, dom)
                               : f;
  const Vec3 x = fb.point - fb.normal * lp.xperp;
  const Vec3 v = fb.tangent[0] * lp.w[0] + fb.tangent[1] * lp.w[1] - fb.normal * lp.vperp;
  return {x, v};
}

double singular_set_distance(const Vec3& x, const Vec3& v, const ConvexDomain& dom) {
  const BoundaryFrame fr = project_to_boundary(x, dom);
  const double vperp = -dot(v, fr.normal);
  return fr.wall_distance + vperp * vperp;
}

}  // namespace vp
