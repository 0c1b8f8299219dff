#include <benchmark/benchmark.h>

#include <cmath>

#include "wildscalar/grid.hpp"
#include "wildscalar/spectral.hpp"

namespace ws = wildscalar;

namespace {

ws::ScalarField smooth(int n) {
  return ws::ScalarField::sample(n, [](double x, double y) { return std::sin(3 * x) * std::cos(2 * y) + std::cos(x + y); });
}

void BM_ForwardInverse(benchmark::State& st) {
  const ws::ScalarField f = smooth(static_cast<int>(st.range(0)));
  for (auto _ : st) benchmark::DoNotOptimize(ws::inverse(ws::forward(f)));
}

void BM_Advect(benchmark::State& st) {
  const int n = static_cast<int>(st.range(0));
  const ws::ScalarField f = smooth(n);
  const ws::VectorField u = ws::gradient(f);
  for (auto _ : st) benchmark::DoNotOptimize(ws::advect(u, f));
}

void BM_SolveDiv(benchmark::State& st) {
  ws::ScalarField f = smooth(static_cast<int>(st.range(0)));
  f -= ws::ScalarField(f.n, f.mean());
  for (auto _ : st) benchmark::DoNotOptimize(ws::solve_div(f));
}

}  // namespace

BENCHMARK(BM_ForwardInverse)->RangeMultiplier(2)->Range(64, 512);
BENCHMARK(BM_Advect)->RangeMultiplier(2)->Range(64, 512);
BENCHMARK(BM_SolveDiv)->RangeMultiplier(2)->Range(64, 512);

BENCHMARK_MAIN();
