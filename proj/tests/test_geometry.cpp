#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "support.hpp"
#include "vp/errors.hpp"

using namespace vp;
using namespace vptest;

TEST_CASE("ball projection: radial closed form") {
  const ConvexDomain ball = unit_ball();

  const BoundaryFrame f = project_to_boundary({0.5, 0, 0}, ball);
  CHECK(norm(f.point - Vec3{1, 0, 0}) < 1e-12);
  CHECK(f.wall_distance == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(norm(f.normal - Vec3{1, 0, 0}) < 1e-12);

  CHECK_THROWS_AS(project_to_boundary({0, 0, 0}, ball), AmbiguousProjection);
  CHECK_THROWS_AS(project_to_boundary({2, 0, 0}, ball), OutsideDomain);
  // inside but deeper than the tubular neighborhood
  CHECK_THROWS_AS(project_to_boundary({0.05, 0.05, 0}, ball), AmbiguousProjection);
}

TEST_CASE("ball projection: exact up to 1e-12 across the band") {
  const ConvexDomain ball = unit_ball();
  Rng rng(101);
  for (int i = 0; i < 2000; ++i) {
    const Vec3 dir = rng.unit();
    const double r = rng.uniform(0.5 + 1e-6, 1.0 - 1e-9);
    const Vec3 x = dir * r;
    const BoundaryFrame f = project_to_boundary(x, ball);
    CHECK(norm(f.point - dir) < 1e-12);
    CHECK(std::abs(f.wall_distance - (1.0 - r)) < 1e-12);
  }
}

TEST_CASE("ellipsoid projection matches the dense-sampling oracle") {
  const ConvexDomain e = ellipsoid211();
  const Vec3 query{1.9, 0, 0};

  const Vec3 oracle = closest_point_oracle(query, e);
  const BoundaryFrame f = project_to_boundary(query, e);

  CHECK(norm(f.point - oracle) < 1e-6);
  CHECK(norm(f.point - Vec3{2, 0, 0}) < 1e-9);
  CHECK(f.wall_distance == doctest::Approx(0.1).epsilon(1e-9));

  // an off-axis query for good measure (close enough to the wall)
  const Vec3 q2{1.2, 0.78, 0.1};
  REQUIRE(e.phi(q2) < 0.0);
  const BoundaryFrame f2 = project_to_boundary(q2, e);
  const Vec3 oracle2 = closest_point_oracle(q2, e);
  CHECK(norm(f2.point - oracle2) < 2e-5);
  CHECK(std::abs(f2.wall_distance - norm(q2 - oracle2)) < 2e-7);
}

TEST_CASE("sphere frames: curvatures and second fundamental form") {
  const ConvexDomain ball = unit_ball();
  const BoundaryFrame f = surface_frame({0, 0, 1}, ball);
  CHECK(f.curvature[0] == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(f.curvature[1] == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(f.second_form[0] == doctest::Approx(-1.0).epsilon(1e-10));
  CHECK(f.second_form[1] == doctest::Approx(-1.0).epsilon(1e-10));

  const ConvexDomain big = ConvexDomain::ball({0, 0, 0}, 2.0);
  const BoundaryFrame f2 = surface_frame({2, 0, 0}, big);
  CHECK(f2.curvature[0] == doctest::Approx(0.5).epsilon(1e-10));
  CHECK(f2.curvature[1] == doctest::Approx(0.5).epsilon(1e-10));

  // orthonormality and outward normal
  CHECK(std::abs(norm(f.normal) - 1.0) < 1e-13);
  CHECK(std::abs(dot(f.tangent[0], f.normal)) < 1e-13);
  CHECK(std::abs(dot(f.tangent[1], f.normal)) < 1e-13);
  CHECK(std::abs(dot(f.tangent[0], f.tangent[1])) < 1e-13);
}

TEST_CASE("ellipsoid vertex curvature against the finite-difference oracle") {
  const ConvexDomain e = ellipsoid211();
  const BoundaryFrame f = surface_frame({2, 0, 0}, e);
  // both principal curvatures at the major-axis vertex equal a/b^2 = 2
  CHECK(f.curvature[0] == doctest::Approx(2.0).epsilon(1e-8));
  CHECK(f.curvature[1] == doctest::Approx(2.0).epsilon(1e-8));

  for (int i = 0; i < 2; ++i) {
    const double k_fd = fd_normal_curvature(e, f.point, f.tangent[i]);
    CHECK(std::abs(k_fd - f.curvature[i]) < 1e-6);
  }
}

TEST_CASE("shape operator eigen-relation at sampled boundary points") {
  const ConvexDomain domains[] = {unit_ball(), ellipsoid211(), superellipsoid()};
  for (const auto& dom : domains) {
    for (int i = 0; i < 24; ++i) {
      const Vec3 p = dom.boundary_point(fibonacci_sphere(i, 24));
      const BoundaryFrame f = surface_frame(p, dom);
      for (int t = 0; t < 2; ++t) {
        // dn along u_i has normal-curvature component k_i, and the frame is
        // principal, so the full derivative aligns with u_i
        const double k_fd = fd_normal_curvature(dom, p, f.tangent[t]);
        CHECK(std::abs(k_fd - f.curvature[t]) < 1e-5 * (1.0 + f.curvature[t]));
      }
    }
  }
}

TEST_CASE("convexity, sign conventions and frame validity across domains") {
  const ConvexDomain domains[] = {unit_ball(), ellipsoid211(), superellipsoid()};
  Rng rng(77);
  for (const auto& dom : domains) {
    const auto bbox = dom.bounding_box();

    // convexity of phi on random segments
    for (int i = 0; i < 400; ++i) {
      Vec3 a, b;
      for (int c = 0; c < 3; ++c) {
        a[c] = rng.uniform(bbox[0][c], bbox[1][c]);
        b[c] = rng.uniform(bbox[0][c], bbox[1][c]);
      }
      const double cap = std::max(dom.phi(a), dom.phi(b));
      const double scale = std::abs(cap) + 1.0;
      for (double t : {0.25, 0.5, 0.75})
        CHECK(dom.phi(a * t + b * (1.0 - t)) <= cap + 1e-12 * scale);
    }

    // bounded interior with a nonempty center
    CHECK(dom.phi(dom.center()) < 0.0);
    for (int i = 0; i < 64; ++i) {
      const Vec3 far = dom.center() + fibonacci_sphere(i, 64) * (1.001 * dom.diameter());
      CHECK(dom.phi(far) > 0.0);
    }

    // boundary battery: k >= 0, b <= 0, gamma symmetric, gradient alive,
    // metric factors valid across the tubular band
    for (int i = 0; i < 48; ++i) {
      const Vec3 p = dom.boundary_point(fibonacci_sphere(i, 48));
      CHECK(norm(dom.grad(p)) > 1e-10);
      const BoundaryFrame f = surface_frame(p, dom);
      CHECK(f.curvature[0] >= 0.0);
      CHECK(f.curvature[1] >= 0.0);
      CHECK(f.second_form[0] <= 0.0);
      CHECK(f.second_form[1] <= 0.0);
      for (int a = 0; a < 2; ++a)
        for (int j = 0; j < 2; ++j)
          for (int l = 0; l < 2; ++l)
            CHECK(f.christoffel[a][j][l] == f.christoffel[a][l][j]);
      const double d = 0.999 * dom.tubular_width();
      CHECK(f.metric_factor(0, d) > 0.0);
      CHECK(f.metric_factor(1, d) > 0.0);
    }
  }
}

TEST_CASE("local phase decomposition: radial and tangential motion") {
  const ConvexDomain ball = unit_ball();

  const LocalPhase inward = to_local({0.5, 0, 0}, {-1, 0, 0}, ball);
  CHECK(inward.vperp == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::abs(inward.w[0]) < 1e-12);
  CHECK(std::abs(inward.w[1]) < 1e-12);

  const LocalPhase tangential = to_local({0.5, 0, 0}, {0, 1, 0}, ball);
  CHECK(std::abs(tangential.vperp) < 1e-12);
  CHECK(tangential.tangential_speed2() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("local/cartesian round trip over a random battery") {
  const ConvexDomain e = ellipsoid211();
  Rng rng(2024);
  int tested = 0;
  while (tested < 10000) {
    const Vec3 dir = rng.unit();
    const Vec3 bp = e.boundary_point(dir);
    const double d = rng.uniform(1e-6, 0.999 * e.tubular_width());
    const Vec3 n = normalized(e.grad(bp));
    const Vec3 x = bp - n * d;
    const Vec3 v = rng.vec(-2.0, 2.0);

    const LocalPhase lp = to_local(x, v, e);
    const auto [x2, v2] = from_local(lp, e);

    CHECK(norm(x2 - x) <= 1e-9 * e.diameter());
    CHECK(norm(v2 - v) <= 1e-9 * (norm(v) + 1.0));

    const double energy_local = lp.tangential_speed2() + lp.vperp * lp.vperp;
    CHECK(std::abs(energy_local - norm2(v)) <= 1e-10 * (norm2(v) + 1.0));
    ++tested;
  }
}

TEST_CASE("chart step away from the anchor lands back on the surface") {
  const ConvexDomain e = ellipsoid211();
  LocalPhase lp = to_local({1.2, 0.78, 0.1}, {0.2, -0.1, 0.4}, e);
  lp.mu[0] = 0.02;
  lp.mu[1] = -0.015;
  const auto [x, v] = from_local(lp, e);
  // the reconstructed point keeps its wall distance against the shifted base
  CHECK(e.phi(x) < 0.0);
  const BoundaryFrame fr = project_to_boundary(x, e);
  CHECK(fr.wall_distance == doctest::Approx(lp.xperp).epsilon(5e-3));
  CHECK(norm(fr.point - lp.frame.point) > 0.01);  // the base actually moved
  CHECK(norm(v) == doctest::Approx(norm(Vec3{0.2, -0.1, 0.4})).epsilon(1e-9));
}

TEST_CASE("singular set distance") {
  const ConvexDomain ball = unit_ball();

  // tangential velocity on the wall: exactly on the grazing set
  CHECK(singular_set_distance({1, 0, 0}, {0, 1, 0}, ball) == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(singular_set_distance({0.9, 0, 0}, {0, 1, 0}, ball) ==
        doctest::Approx(0.1).epsilon(1e-10));
  CHECK(singular_set_distance({1, 0, 0}, {-0.2, 0, 0}, ball) ==
        doctest::Approx(0.04).epsilon(1e-10));
}

TEST_CASE("umbilic tie-breaking is deterministic") {
  const ConvexDomain ball = unit_ball();
  const Vec3 p = normalized(Vec3{0.3, -0.2, 0.93});
  const BoundaryFrame a = surface_frame(p, ball);
  const BoundaryFrame b = surface_frame(p, ball);
  CHECK(norm(a.tangent[0] - b.tangent[0]) == 0.0);
  CHECK(norm(a.tangent[1] - b.tangent[1]) == 0.0);
}

TEST_CASE("tubular width and diameter") {
  CHECK(unit_ball().tubular_width() == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(unit_ball().diameter() == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(ellipsoid211().tubular_width() == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(ellipsoid211().diameter() == doctest::Approx(4.0).epsilon(1e-12));
  const ConvexDomain se = superellipsoid();
  CHECK(se.diameter() > 2.0);
  CHECK(se.tubular_width() > 0.0);
}
