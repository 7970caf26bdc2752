#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "support.hpp"
#include "vp/dynamics.hpp"
#include "vp/ensemble.hpp"
#include "vp/errors.hpp"
#include "vp/picard.hpp"
#include "vp/simulation.hpp"

using namespace vp;
using namespace vptest;

namespace {

InitialData small_bump() {
  return InitialData::maxwellian_bump({0, 0, 0}, 0.45, 1.0, 0.35, 1.05, 0.04);
}

std::vector<double> sorted_weights(const ParticleEnsemble& e) {
  std::vector<double> w;
  w.reserve(e.size());
  for (const auto& p : e.particles) w.push_back(p.weight);
  std::sort(w.begin(), w.end());
  return w;
}

}  // namespace

TEST_CASE("initial-data validation: compatible profiles pass identically") {
  const ConvexDomain ball = unit_ball();
  const InitialData data = small_bump();

  const ValidationReport rep = validate_initial(data, ball, 32, 16, 24);
  CHECK(rep.pass());
  // the x-support never reaches the wall, so every wall check is exactly zero
  CHECK(rep.worst_reflection_violation == 0.0);
  CHECK(rep.worst_gradient_violation == 0.0);
  CHECK(rep.worst_flatness_violation == 0.0);
}

TEST_CASE("initial-data validation: an odd normal-velocity dependence is caught") {
  const ConvexDomain ball = unit_ball();

  // support reaches the wall and carries a v.n-odd factor there
  const auto broken = [](const Vec3& x, const Vec3& v) {
    const double r = norm(x);
    const double base = std::max(0.0, 1.05 - r) * std::exp(-norm2(v));
    const Vec3 nhat = r > 1e-12 ? x / r : Vec3{1, 0, 0};
    return base * (1.0 + 0.5 * dot(v, nhat));
  };
  const auto rho = [&broken](const Vec3& x) {
    // crude closed form is unnecessary; a small velocity quadrature suffices
    double acc = 0.0;
    const int n = 6;
    const double dv = 2.0 / n;
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b)
        for (int c = 0; c < n; ++c) {
          const Vec3 v{-1.0 + (a + 0.5) * dv, -1.0 + (b + 0.5) * dv, -1.0 + (c + 0.5) * dv};
          acc += broken(x, v) * dv * dv * dv;
        }
    return acc;
  };

  const ValidationReport rep = validate_initial(broken, 1.0, 0.04, 0.0, ball, rho, 32, 24, 24);
  CHECK_FALSE(rep.reflection_symmetry_ok);

  // the analytic supremum of |f(x,v) - f(x,v*)| on the wall is
  // 0.05 * max_t t e^{-t^2} restricted to the sampled velocity cube
  double analytic_max = 0.0;
  for (int i = 0; i <= 2000; ++i) {
    const double t = std::sqrt(3.0) * i / 2000.0;
    analytic_max = std::max(analytic_max, 0.05 * t * std::exp(-t * t));
  }
  CHECK(rep.worst_reflection_violation <= 1.0001 * analytic_max);
  CHECK(rep.worst_reflection_violation >= 0.25 * analytic_max);
  CHECK_FALSE(rep.pass());
}

TEST_CASE("sampling: empty support raises, uniform boxes are exact") {
  CHECK_THROWS_AS(sample_ensemble(InitialData::zero_profile(), 1000, 7), EmptySupport);

  const InitialData box = InitialData::uniform_box({-0.2, -0.2, -0.2}, {0.2, 0.2, 0.2},
                                                   {-0.5, -0.5, -0.5}, {0.5, 0.5, 0.5}, 2.0);
  const ParticleEnsemble e = sample_ensemble(box, 20000, 42);
  CHECK(e.total_weight == doctest::Approx(box.total_integral()).epsilon(1e-12));
  CHECK(e.size() == 20000);  // constant profile keeps every draw
}

TEST_CASE("sampling: quadrature match, reproducibility, convergence") {
  const InitialData data = small_bump();
  const double exact = data.total_integral();

  const ParticleEnsemble e1 = sample_ensemble(data, 100000, 11);
  CHECK(std::abs(e1.total_weight - exact) <= 1e-3 * exact);
  CHECK(e1.q0_bound == doctest::Approx(1.05));
  CHECK(e1.q0_measured <= e1.q0_bound + 1e-12);

  const ParticleEnsemble e2 = sample_ensemble(data, 100000, 11);
  REQUIRE(e1.size() == e2.size());
  for (std::size_t i = 0; i < e1.size(); i += 977) {
    CHECK(e1.particles[i].x.x == e2.particles[i].x.x);
    CHECK(e1.particles[i].v.z == e2.particles[i].v.z);
    CHECK(e1.particles[i].weight == e2.particles[i].weight);
  }

  // error shrinks at least like N^{-1/2} across two decades
  double err_small = 0.0, err_large = 0.0;
  for (int pass = 0; pass < 2; ++pass) {
    const long n = pass == 0 ? 2000 : 200000;
    double worst = 0.0;
    for (uint64_t seed : {1ull, 2ull, 3ull}) {
      const ParticleEnsemble e = sample_ensemble(data, n, seed);
      worst = std::max(worst, std::abs(e.total_weight - exact) / exact);
    }
    (pass == 0 ? err_small : err_large) = worst;
  }
  CHECK(err_large <= err_small * std::pow(100.0, -0.45));
}

TEST_CASE("deposition: point masses, linearity, wall folding") {
  const ConvexDomain ball = unit_ball();
  const auto grid = make_grid(ball, GridSpec::cover_cells(ball, 24));
  const double h = grid->spec().h;

  // one particle exactly at an interior cell center fills exactly that cell
  ParticleEnsemble single;
  const Vec3 cc = grid->spec().cell_center(12, 12, 12);
  REQUIRE(ball.phi(cc) < 0.0);
  single.particles.push_back({cc, {0, 0, 0}, 1.0, 1.0});
  single.total_weight = 1.0;
  const DensityGrid d1 = deposit(single, grid);
  CHECK(d1.rho[grid->spec().index(12, 12, 12)] == doctest::Approx(1.0 / (h * h * h)));
  CHECK(d1.total_mass == doctest::Approx(1.0).epsilon(1e-14));

  // two half-weight particles anywhere sum to unit mass
  ParticleEnsemble pair;
  pair.particles.push_back({{0.3, -0.2, 0.1}, {}, 0.5, 1.0});
  pair.particles.push_back({{-0.6, 0.4, 0.35}, {}, 0.5, 1.0});
  pair.total_weight = 1.0;
  CHECK(deposit(pair, grid).total_mass == doctest::Approx(1.0).epsilon(1e-14));

  // mass is conserved exactly even with every particle hugging the wall
  Rng rng(66);
  ParticleEnsemble wall;
  KahanSum ws;
  for (int i = 0; i < 5000; ++i) {
    const Vec3 dir = rng.unit();
    const double r = rng.uniform(0.97, 0.999999);
    const double w = rng.uniform(0.1, 1.0);
    wall.particles.push_back({dir * r, {}, w, 1.0});
    ws.add(w);
  }
  wall.total_weight = ws.value();
  const DensityGrid dw = deposit(wall, grid);
  CHECK(std::abs(dw.total_mass - wall.total_weight) <= 1e-10 * wall.total_weight);
  for (std::size_t c = 0; c < dw.rho.size(); ++c) {
    if (dw.rho[c] != 0.0) CHECK(grid->interior(c));
  }

  ParticleEnsemble outside;
  outside.particles.push_back({{1.5, 0, 0}, {}, 1.0, 1.0});
  outside.total_weight = 1.0;
  CHECK_THROWS_AS(deposit(outside, grid), ParticleOutside);
}

TEST_CASE("deposition: worker count changes only the rounding, never the physics") {
  const ConvexDomain ball = unit_ball();
  const auto grid = make_grid(ball, GridSpec::cover_cells(ball, 24));
  const ParticleEnsemble e = sample_ensemble(small_bump(), 30000, 8);

  const DensityGrid serial = deposit(e, grid, 1);
  const DensityGrid serial2 = deposit(e, grid, 1);
  CHECK(serial.rho == serial2.rho);  // bitwise reproducible at one worker

  const DensityGrid parallel = deposit(e, grid, 4);
  CHECK(std::abs(parallel.total_mass - serial.total_mass) <=
        1e-12 * std::abs(serial.total_mass));
  double worst = 0.0;
  for (std::size_t c = 0; c < serial.rho.size(); ++c)
    worst = std::max(worst, std::abs(parallel.rho[c] - serial.rho[c]));
  CHECK(worst <= 1e-10);
}

TEST_CASE("deposition: uniform cloud is statistically flat") {
  const ConvexDomain ball = unit_ball();
  const auto grid = make_grid(ball, GridSpec::cover_cells(ball, 24));
  const double h = grid->spec().h;

  Rng rng(12345);
  ParticleEnsemble e;
  const double R = 0.85;
  const long N = 100000;
  KahanSum ws;
  while (long(e.particles.size()) < N) {
    const Vec3 x = rng.vec(-R, R);
    if (norm2(x) >= R * R) continue;
    e.particles.push_back({x, {}, 1.0, 1.0});
    ws.add(1.0);
  }
  e.total_weight = ws.value();
  const DensityGrid d = deposit(e, grid);

  const double volume = 4.0 / 3.0 * M_PI * R * R * R;
  const double lambda = N * (h * h * h) / volume;  // expected mass per cell
  const double sigma = std::sqrt(lambda);

  long cells = 0, within3 = 0;
  for (std::size_t u = 0; u < grid->n_interior(); ++u) {
    const std::size_t c = grid->interior_cells()[u];
    const int i = static_cast<int>(c % grid->spec().n[0]);
    const int j = static_cast<int>((c / grid->spec().n[0]) % grid->spec().n[1]);
    const int k = static_cast<int>(c / (std::size_t(grid->spec().n[0]) * grid->spec().n[1]));
    // stay well inside the uniform region so CIC sees the full cloud
    if (norm(grid->spec().cell_center(i, j, k)) > R - 2.5 * h) continue;
    ++cells;
    const double count = d.mass[c];
    if (std::abs(count - lambda) <= 3.0 * sigma) ++within3;
    CHECK(std::abs(count - lambda) <= 6.0 * sigma);
  }
  REQUIRE(cells > 500);
  CHECK(double(within3) / cells >= 0.95);
}

TEST_CASE("q tracker and the static-field energy identity") {
  const ConvexDomain ball = unit_ball();

  ParticleEnsemble rest;
  rest.particles.push_back({{0.1, 0, 0}, {0, 0, 0}, 1.0, 1.0});
  rest.total_weight = 1.0;
  QTracker q0;
  CHECK(q0.update(rest) == 0.0);

  // per-particle |V|^2 - 2 phi(X) is exactly conserved along the flow of a
  // static field, and Q(t)^2 <= Q(0)^2 + 2 osc(phi)
  const AnalyticField field = uniform_ball_field(1.0);
  Rng rng(21);
  double q_start = 0.0;
  std::vector<PhaseState> states;
  for (int i = 0; i < 50; ++i) {
    PhaseState st;
    st.X = rng.unit() * rng.uniform(0.0, 0.8);
    st.V = rng.unit() * rng.uniform(0.0, 0.9);
    q_start = std::max(q_start, norm(st.V));
    states.push_back(st);
  }
  const double osc_phi = 1.0 / 6.0;  // |phi| spans [0, 1/6) on the unit ball
  double q_end = 0.0;
  for (auto& st : states) {
    const double inv0 = norm2(st.V) - 2.0 * field.potential_at(st.X);
    for (int k = 0; k < 1000; ++k) st = advance(st, field, ball, 1e-3);
    const double inv1 = norm2(st.V) - 2.0 * field.potential_at(st.X);
    CHECK(std::abs(inv1 - inv0) <= 1e-6 * (std::abs(inv0) + 1.0));
    q_end = std::max(q_end, norm(st.V));
  }
  CHECK(q_end * q_end <= q_start * q_start + 2.0 * osc_phi + 1e-9);
}

TEST_CASE("self-consistent run: zero data, conservation, blowup sentinel") {
  const ConvexDomain ball = unit_ball();
  const auto grid = make_grid(ball, GridSpec::cover_cells(ball, 24));

  SimulationParams params;
  params.T = 0.01;
  params.dt = 1e-3;

  // identically zero data: every record is zero
  ParticleEnsemble empty;
  const SimulationResult zero = self_consistent_run(empty, grid, ball, params);
  for (const auto& r : zero.records) {
    CHECK(r.mass == 0.0);
    CHECK(r.kinetic_energy == 0.0);
    CHECK(r.field_energy == 0.0);
    CHECK(r.q == 0.0);
    CHECK(r.rho_max == 0.0);
  }

  // cold shell: nothing moves, mass stays put step after step
  ParticleEnsemble shell;
  KahanSum ws;
  for (int i = 0; i < 2000; ++i) {
    shell.particles.push_back({fibonacci_sphere(i, 2000) * 0.5, {}, 1.0 / 2000.0, 1.0});
    ws.add(1.0 / 2000.0);
  }
  shell.total_weight = ws.value();
  const auto weights_before = sorted_weights(shell);

  SimulationParams sp = params;
  sp.T = 0.02;
  const SimulationResult res = self_consistent_run(shell, grid, ball, sp);
  for (const auto& r : res.records)
    CHECK(std::abs(r.mass - shell.total_weight) <= 1e-10 * shell.total_weight);
  CHECK(sorted_weights(res.final_ensemble) == weights_before);

  double prev_q = -1.0;
  for (const auto& r : res.records) {
    CHECK(r.q >= prev_q);
    prev_q = r.q;
  }

  SimulationParams tiny = sp;
  tiny.q_ceiling = 1e-12;
  ParticleEnsemble mover = shell;
  mover.particles[0].v = {0.5, 0, 0};
  mover.q0_measured = 0.5;
  CHECK_THROWS_AS(self_consistent_run(mover, grid, ball, tiny), BlowupSuspected);
}

TEST_CASE("self-consistent run: sampled bump with diagnostics and density bound") {
  const ConvexDomain ball = unit_ball();
  const auto grid = make_grid(ball, GridSpec::cover_cells(ball, 24));
  const InitialData data = small_bump();
  const ParticleEnsemble ens = sample_ensemble(data, 20000, 3);
  const auto tags_before = [&] {
    std::vector<double> t;
    for (const auto& p : ens.particles) t.push_back(p.f0_tag);
    std::sort(t.begin(), t.end());
    return t;
  }();

  SimulationParams params;
  params.T = 0.05;
  params.dt = 2.5e-3;
  params.density_bound_max_f0 = data.max_f0();
  params.hopf_every = 4;

  const SimulationResult res = self_consistent_run(ens, grid, ball, params);
  REQUIRE(res.records.size() == 21);
  CHECK(res.density_bound_ok);
  CHECK(res.density_bound_worst > 0.0);
  CHECK(res.records.back().q <= res.q_ceiling);

  for (const auto& r : res.records) {
    CHECK(std::abs(r.mass - ens.total_weight) <= 1e-10 * ens.total_weight);
    CHECK(r.total_energy == r.kinetic_energy + r.field_energy);
    CHECK(r.rho_53 > 0.0);
  }
  CHECK(res.records[0].hopf_margin > 0.0);
  CHECK(res.records[4].hopf_margin > 0.0);
  CHECK(res.records[1].hopf_margin == 0.0);  // cadence skips this step

  // transported profile values are carried unchanged
  std::vector<double> tags_after;
  for (const auto& p : res.final_ensemble.particles) tags_after.push_back(p.f0_tag);
  std::sort(tags_after.begin(), tags_after.end());
  CHECK(tags_after == tags_before);

  // energy moves but stays near its starting value on this short horizon
  const double e0 = res.records.front().total_energy;
  const double e1 = res.records.back().total_energy;
  CHECK(std::abs(e1 - e0) <= 0.05 * e0);
}

TEST_CASE("frozen-field iteration: fixed point at zero and contracting deltas") {
  const ConvexDomain ball = unit_ball();
  const auto grid = make_grid(ball, GridSpec::cover_cells(ball, 24));

  PicardParams params;
  params.T = 0.1;
  params.dt = 5e-3;
  params.n_max = 4;
  params.tol = 0.0;  // run all iterates

  // zero data: iterate 1 is already the fixed point
  {
    PicardParams p0 = params;
    p0.tol = 1e-12;
    ParticleEnsemble empty;
    const PicardResult res = picard_run(empty, grid, ball, p0);
    CHECK(res.converged);
    REQUIRE(res.iterates.size() >= 2);
    CHECK(res.iterates[1].delta == 0.0);
    for (double qv : res.iterates[1].q_curve) CHECK(qv == 0.0);
  }

  const InitialData data = small_bump();
  const ParticleEnsemble ens = sample_ensemble(data, 8000, 5);

  // a starved iteration budget reports non-convergence without failing
  {
    PicardParams starved = params;
    starved.n_max = 1;
    starved.tol = 1e-20;
    const PicardResult res = picard_run(ens, grid, ball, starved);
    CHECK_FALSE(res.converged);
    CHECK(res.iterates.size() == 2);
    CHECK(res.iterates[1].delta > 1e-20);
  }

  const PicardResult res = picard_run(ens, grid, ball, params);

  REQUIRE(res.iterates.size() == std::size_t(params.n_max) + 1);
  const double d1 = res.iterates[1].delta;
  const double d2 = res.iterates[2].delta;
  const double d3 = res.iterates[3].delta;
  CHECK(d1 > d2);
  CHECK(d2 > d3);

  // integrated-acceleration bound: Q^n(t) <= Q(0) + t max|E^{n-1}|
  for (const auto& it : res.iterates) {
    if (it.n == 0) continue;
    for (std::size_t k = 0; k < it.q_curve.size(); ++k) {
      const double t = k * params.dt;
      CHECK(it.q_curve[k] <= ens.q0_measured + t * it.max_field + 1e-9);
    }
  }

  // mass is exact for every iterate and every step
  for (const auto& it : res.iterates)
    for (const auto& r : it.records)
      CHECK(std::abs(r.mass - ens.total_weight) <= 1e-10 * ens.total_weight);
}
