#include <benchmark/benchmark.h>

#include "dsm/certifier.hpp"
#include "dsm/induction.hpp"
#include "dsm/map.hpp"
#include "dsm/partition.hpp"

namespace {

void BM_IterateCritical(benchmark::State& state) {
  const dsm::MapParams p(0.37, 0.95);
  const int n = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(dsm::iterate_critical(p, n));
  state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_IterateCritical)->Arg(100)->Arg(10000);

void BM_Lyapunov(benchmark::State& state) {
  const dsm::MapParams p(0.37, 0.45);
  for (auto _ : state) benchmark::DoNotOptimize(dsm::lyapunov_critical(p, 100000, 100));
}
BENCHMARK(BM_Lyapunov);

void BM_Locate(benchmark::State& state) {
  const dsm::ReturnWindow w(3);
  double x = 0.5 + 1e-3;
  for (auto _ : state) {
    benchmark::DoNotOptimize(dsm::locate(w, x));
    x += 1e-9;
  }
}
BENCHMARK(BM_Locate);

void BM_Certify(benchmark::State& state) {
  const dsm::MapParams p(0.2, 0.6);
  const int N = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(dsm::certify_uniform(p, N, 1.0 + 1e-9));
}
BENCHMARK(BM_Certify)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond);

void BM_ClassifyPoint(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(dsm::classify_point(0.1, 0.7));
}
BENCHMARK(BM_ClassifyPoint)->Unit(benchmark::kMillisecond);

void BM_InductionRun(benchmark::State& state) {
  dsm::InductionConfig c;
  c.a0 = 0.20744082301459277;
  c.N0 = 8;
  c.b = 0.999;
  c.r_delta = 3;
  c.workers = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(dsm::run(c));
}
BENCHMARK(BM_InductionRun)->Arg(1)->Arg(2)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
