#include <benchmark/benchmark.h>

#include <cmath>

#include "gheat/bench.hpp"
#include "gheat/linsys.hpp"
#include "gheat/stepper.hpp"

using namespace gheat;

namespace {

LatticeLevel wavy(const Grid& g) {
  return sample(g, [](double x, double y) { return std::sin(5 * (x + y)) + 0.3 * x * y; });
}

void BM_BuildCoefficients(benchmark::State& state) {
  const Grid g = make_grid(1.0, static_cast<int>(state.range(0)), 1.0, 100);
  const auto u = wavy(g);
  const auto box = bench::example_box();
  for (auto _ : state) benchmark::DoNotOptimize(linsys::build_coefficients(u, g, box));
  state.SetItemsProcessed(state.iterations() * static_cast<long>(g.interior_count()));
}
BENCHMARK(BM_BuildCoefficients)->Arg(40)->Arg(80)->Arg(160);

void BM_Assemble(benchmark::State& state) {
  const Grid g = make_grid(1.0, static_cast<int>(state.range(0)), 1.0, 100);
  const auto u = wavy(g);
  const auto coeffs = linsys::build_coefficients(u, g, bench::example_box());
  for (auto _ : state) benchmark::DoNotOptimize(linsys::assemble(u, coeffs, g, u));
  state.SetItemsProcessed(state.iterations() * static_cast<long>(g.interior_count()));
}
BENCHMARK(BM_Assemble)->Arg(40)->Arg(80)->Arg(160);

void BM_Solve(benchmark::State& state) {
  const Grid g = make_grid(1.0, static_cast<int>(state.range(0)), 1.0, 100);
  const auto u = wavy(g);
  const auto op = linsys::assemble(u, linsys::build_coefficients(u, g, bench::example_box()), g, u);
  for (auto _ : state) benchmark::DoNotOptimize(linsys::solve(op, 1e-12));
}
BENCHMARK(BM_Solve)->Arg(40)->Arg(80)->Arg(160)->Unit(benchmark::kMicrosecond);

void BM_PicardStep(benchmark::State& state) {
  const Grid g = make_grid(1.0, static_cast<int>(state.range(0)), 1.0, 4 * static_cast<int>(state.range(0)) * static_cast<int>(state.range(0)) / 8);
  const auto m = bench::example1_problem();
  const auto u = sample(g, m.problem.initial);
  const SolverConfig cfg;
  for (auto _ : state) benchmark::DoNotOptimize(stepper::picard_step(u, 1, m.problem, g, cfg));
}
BENCHMARK(BM_PicardStep)->Arg(20)->Arg(40)->Arg(80)->Unit(benchmark::kMicrosecond);

void BM_MarchExample1(benchmark::State& state) {
  const auto m = bench::example1_problem();
  const int cells = static_cast<int>(state.range(0));
  const Grid g = make_grid(1.0, cells, 1.0, cells * cells / 2);
  for (auto _ : state)
    benchmark::DoNotOptimize(stepper::march_streaming(m.problem, g, SolverConfig{}, nullptr));
}
BENCHMARK(BM_MarchExample1)->Arg(10)->Arg(20)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
