#include <benchmark/benchmark.h>

#include "logibeta/polya.hpp"

using namespace logibeta;

static void BM_SamplePolya(benchmark::State& state) {
  Rng rng(1);
  const ShapePair shape{1.0, 2.0};
  const int truncation = static_cast<int>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(sample_polya(shape, truncation, rng).lambda);
  }
}
BENCHMARK(BM_SamplePolya)->Arg(50)->Arg(200)->Arg(800);

static void BM_PolyaGamma(benchmark::State& state) {
  Rng rng(2);
  const double c = static_cast<double>(state.range(0)) / 10.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(sample_polya_gamma_1(c, rng));
  }
}
BENCHMARK(BM_PolyaGamma)->Arg(0)->Arg(20)->Arg(100);
