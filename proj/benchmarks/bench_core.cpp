// Microbenchmarks for the hot paths: closest-point projection, the cut-cell
// Poisson solve, the particle push and cloud-in-cell deposition.
#include <benchmark/benchmark.h>

#include "vp/dynamics.hpp"
#include "vp/ensemble.hpp"
#include "vp/poisson.hpp"
#include "vp/util.hpp"

using namespace vp;

namespace {

const ConvexDomain& ball() {
  static const ConvexDomain d = ConvexDomain::ball({0, 0, 0}, 1.0);
  return d;
}

const ConvexDomain& ellipsoid() {
  static const ConvexDomain d = ConvexDomain::ellipsoid({0, 0, 0}, {2.0, 1.0, 1.0});
  return d;
}

void BM_ProjectToBoundary(benchmark::State& state) {
  const ConvexDomain& dom = ellipsoid();
  std::vector<Vec3> queries;
  for (int i = 0; i < 256; ++i) {
    const Vec3 bp = dom.boundary_point(fibonacci_sphere(i, 256));
    queries.push_back(bp - normalized(dom.grad(bp)) * 0.1);
  }
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(project_to_boundary(queries[i % queries.size()], dom));
    ++i;
  }
}
BENCHMARK(BM_ProjectToBoundary);

void BM_PoissonSolve(benchmark::State& state) {
  const int cells = static_cast<int>(state.range(0));
  const auto grid = make_grid(ball(), GridSpec::cover_cells(ball(), cells));
  const DensityGrid rho =
      DensityGrid::from_function(grid, [](const Vec3& x) { return 1.0 + x.x; });
  for (auto _ : state) {
    benchmark::DoNotOptimize(solve_poisson(rho, ball(), 1e-10));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(grid->n_interior()));
}
BENCHMARK(BM_PoissonSolve)->Arg(24)->Arg(48)->Unit(benchmark::kMillisecond);

void BM_WarmPoissonSolve(benchmark::State& state) {
  const auto grid = make_grid(ball(), GridSpec::cover_cells(ball(), 48));
  const DensityGrid rho =
      DensityGrid::from_function(grid, [](const Vec3& x) { return 1.0 + x.x; });
  const PotentialField prev = solve_poisson(rho, ball(), 1e-10);
  const DensityGrid bumped =
      DensityGrid::from_function(grid, [](const Vec3& x) { return 1.0 + 1.01 * x.x; });
  for (auto _ : state) {
    benchmark::DoNotOptimize(solve_poisson(bumped, ball(), 1e-10, &prev));
  }
}
BENCHMARK(BM_WarmPoissonSolve)->Unit(benchmark::kMillisecond);

void BM_AdvanceBilliard(benchmark::State& state) {
  const AnalyticField field = uniform_ball_field(1.0);
  PhaseState st;
  st.X = {0.9, 0, 0};
  st.V = {0.1, 1.0, 0};
  for (auto _ : state) {
    st = advance(st, field, ball(), 1e-3);
    benchmark::DoNotOptimize(st);
  }
}
BENCHMARK(BM_AdvanceBilliard);

void BM_GridFieldPush(benchmark::State& state) {
  const auto grid = make_grid(ball(), GridSpec::cover_cells(ball(), 48));
  const DensityGrid rho = DensityGrid::from_function(grid, [](const Vec3&) { return 1.0; });
  const PotentialField phi = solve_poisson(rho, ball(), 1e-10);
  PhaseState st;
  st.X = {0.6, 0.1, 0};
  st.V = {0.1, 0.8, 0};
  for (auto _ : state) {
    st = advance(st, phi, ball(), 1e-3);
    benchmark::DoNotOptimize(st);
  }
}
BENCHMARK(BM_GridFieldPush);

void BM_Deposit(benchmark::State& state) {
  const auto grid = make_grid(ball(), GridSpec::cover_cells(ball(), 48));
  const InitialData data = InitialData::maxwellian_bump({0, 0, 0}, 0.45, 1.0, 0.35, 1.05, 0.04);
  const ParticleEnsemble ens = sample_ensemble(data, state.range(0), 1);
  for (auto _ : state) {
    benchmark::DoNotOptimize(deposit(ens, grid));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(ens.size()));
}
BENCHMARK(BM_Deposit)->Arg(10000)->Arg(100000)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
