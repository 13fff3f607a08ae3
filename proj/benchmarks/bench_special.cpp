#include <benchmark/benchmark.h>

#include "logibeta/polya.hpp"
#include "logibeta/special_math.hpp"

using namespace logibeta;

static void BM_Digamma(benchmark::State& state) {
  double x = 0.1;
  for (auto _ : state) {
    benchmark::DoNotOptimize(digamma(x));
    x += 0.37;
    if (x > 50.0) x = 0.1;
  }
}
BENCHMARK(BM_Digamma);

static void BM_BesselKGeneral(benchmark::State& state) {
  double x = 0.05;
  for (auto _ : state) {
    benchmark::DoNotOptimize(bessel_k_general(1.3, x));
    x += 0.13;
    if (x > 30.0) x = 0.05;
  }
}
BENCHMARK(BM_BesselKGeneral);

static void BM_BesselKHalfInteger(benchmark::State& state) {
  double x = 0.05;
  for (auto _ : state) {
    benchmark::DoNotOptimize(bessel_k(1.5, x));
    x += 0.13;
    if (x > 30.0) x = 0.05;
  }
}
BENCHMARK(BM_BesselKHalfInteger);

static void BM_PolyaLogDensity(benchmark::State& state) {
  double lam = 0.5;
  for (auto _ : state) {
    benchmark::DoNotOptimize(polya_log_density(lam, {1.0, 2.0}));
    lam += 0.31;
    if (lam > 20.0) lam = 0.5;
  }
}
BENCHMARK(BM_PolyaLogDensity);

static void BM_LogisticStable(benchmark::State& state) {
  double x = -30.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(logistic(x));
    x += 0.61;
    if (x > 30.0) x = -30.0;
  }
}
BENCHMARK(BM_LogisticStable);
