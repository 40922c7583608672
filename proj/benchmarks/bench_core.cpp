#include <benchmark/benchmark.h>

#include <cmath>

#include "mosersys/constants.hpp"
#include "mosersys/nonlin.hpp"
#include "mosersys/scalar.hpp"
#include "mosersys/system.hpp"

using namespace mosersys;

namespace {

Field bump(const Grid& g) {
  return sample(g, [](double x, double y) { return std::sin(M_PI * x) * std::sin(M_PI * y); });
}

void BM_Stencil(benchmark::State& state) {
  const Grid g = build_domain(Shape::UnitSquare, static_cast<int>(state.range(0)));
  const Field u = bump(g);
  for (auto _ : state) benchmark::DoNotOptimize(neg_laplacian_apply(g, u));
  state.SetItemsProcessed(state.iterations() * static_cast<long>(u.size()));
}
BENCHMARK(BM_Stencil)->Arg(63)->Arg(127)->Arg(255)->Arg(511);

void BM_PoissonSquare(benchmark::State& state) {
  const Grid g = build_domain(Shape::UnitSquare, static_cast<int>(state.range(0)));
  const Field f(g, 1.0);
  for (auto _ : state) benchmark::DoNotOptimize(poisson_solve(g, f));
}
BENCHMARK(BM_PoissonSquare)->Arg(63)->Arg(127)->Arg(255)->Unit(benchmark::kMillisecond);

void BM_PoissonDisk(benchmark::State& state) {
  const Grid g = build_domain(Shape::UnitDisk, static_cast<int>(state.range(0)));
  const Field f(g, 1.0);
  for (auto _ : state) benchmark::DoNotOptimize(poisson_solve(g, f));
}
BENCHMARK(BM_PoissonDisk)->Arg(63)->Arg(127)->Arg(255)->Unit(benchmark::kMillisecond);

void BM_CrossRemainder(benchmark::State& state) {
  double x = 1e-4;
  double acc = 0.0;
  for (auto _ : state) {
    acc += g_val(x, 1.3 - x);
    x = x < 1.2 ? x * 1.01 + 1e-5 : 1e-4;
  }
  benchmark::DoNotOptimize(acc);
}
BENCHMARK(BM_CrossRemainder);

void BM_ScalarGroundState(benchmark::State& state) {
  const Grid g = build_domain(Shape::UnitSquare, static_cast<int>(state.range(0)));
  const Eigenpair eig = principal_eigenpair(g);
  SolverOptions o;
  o.restarts = 0;
  for (auto _ : state) benchmark::DoNotOptimize(solve_scalar_ground_state(g, eig, 0.0, 1.0, o));
}
BENCHMARK(BM_ScalarGroundState)->Arg(31)->Arg(63)->Unit(benchmark::kMillisecond);

void BM_LevelBoxMax(benchmark::State& state) {
  const Grid g = build_domain(Shape::UnitSquare, static_cast<int>(state.range(0)));
  const Eigenpair eig = principal_eigenpair(g);
  SolverOptions o;
  o.restarts = 0;
  const GroundState gs = solve_scalar_ground_state(g, eig, 0.0, 1.0, o);
  const Seeds seeds{gs, gs, eig.lambda1};
  const ModelParams p{0.0, 0.0, 1.0, 1.0, -0.05};
  for (auto _ : state) benchmark::DoNotOptimize(level_box_max(g, p, seeds));
}
BENCHMARK(BM_LevelBoxMax)->Arg(31)->Arg(63)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
