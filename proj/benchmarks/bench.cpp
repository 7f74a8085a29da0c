#include <benchmark/benchmark.h>

#include "lyapbound/bounds.hpp"
#include "lyapbound/fixtures.hpp"
#include "lyapbound/spectrum.hpp"

using namespace lyap;

static void BM_QrSpectrumStep(benchmark::State& state) {
  Ensemble e = fixtures::big_five();
  long n = state.range(0);
  for (auto _ : state) {
    auto est = lyapunov_spectrum_qr(e, static_cast<int>(n), 1, 42);
    benchmark::DoNotOptimize(est.gammas(0));
  }
  state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_QrSpectrumStep)->Arg(100)->Arg(1000);

static void BM_FrankWolfe(benchmark::State& state) {
  Ensemble e = fixtures::big_five();
  BoundOptions o;
  o.tol = 1e-4;
  for (auto _ : state) {
    auto r = convex_upper_fw(e, o);
    benchmark::DoNotOptimize(r.value);
  }
}
BENCHMARK(BM_FrankWolfe);

static void BM_RankOne(benchmark::State& state) {
  Ensemble e = fixtures::group_pair();
  BoundOptions o;
  o.restarts = 8;
  for (auto _ : state) {
    auto r = rank_one_upper(e, o);
    benchmark::DoNotOptimize(r.value);
  }
}
BENCHMARK(BM_RankOne);

BENCHMARK_MAIN();
