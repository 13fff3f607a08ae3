#include <benchmark/benchmark.h>

#include "logibeta/binary_regression.hpp"
#include "logibeta/simulate.hpp"

using namespace logibeta;

namespace {

// n observations on [0,1]^2 once per benchmark repetition set
BinarySimulation make_sim(int n) {
  return simulate_spatial_binary(SpatialTruth::kLbp, 0.2, n, 0, 7);
}

}  // namespace

// dense collapsed likelihood: one Cholesky per evaluation
static void BM_CollapsedDense(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const BinarySimulation sim = make_sim(n);
  const MaternKernel kernel(0.2, 1.5);
  const CorrelationMatrix r = build_matrix(kernel, sim.train.x);
  Rng rng(3);
  const Eigen::VectorXd omega = step_pg(Eigen::VectorXd::Zero(n), rng);
  double lam = 0.3;
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        collapsed_lambda_log_likelihood(lam, omega, sim.train, r, {1.0, 2.0}));
    lam += 0.17;
    if (lam > 5.0) lam = 0.3;
  }
}
BENCHMARK(BM_CollapsedDense)->Arg(100)->Arg(200)->Arg(400);

// low-rank collapsed likelihood through the Woodbury path
static void BM_CollapsedLowRank(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  Rng prng(11);
  Points pts(n, 1);
  for (int i = 0; i < n; ++i) pts(i, 0) = runif(prng);
  const FeatureMapKernel kernel(natural_spline_basis(0.0, 1.0, 6));
  const CorrelationMatrix r = build_matrix(kernel, pts);
  BinaryDataset d;
  d.x = pts;
  d.z.setZero(n);
  for (int i = 0; i < n; i += 2) d.z(i) = 1;
  Rng rng(3);
  const Eigen::VectorXd omega = step_pg(Eigen::VectorXd::Zero(n), rng);
  double lam = 0.3;
  for (auto _ : state) {
    benchmark::DoNotOptimize(collapsed_lambda_log_likelihood(lam, omega, d, r, {1.0, 2.0}));
    lam += 0.17;
    if (lam > 5.0) lam = 0.3;
  }
}
BENCHMARK(BM_CollapsedLowRank)->Arg(100)->Arg(400)->Arg(1600);

// one full blocked Gibbs cycle, dense kernel
static void BM_ChainIterationDense(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const BinarySimulation sim = make_sim(n);
  BinaryRegressionConfig config;
  config.shape = {1.0, 2.0};
  config.kernel_grid.push_back(std::make_shared<MaternKernel>(0.2, 1.5));
  config.kernel_grid_values = Eigen::VectorXd::Constant(1, 0.2);
  config.burn_in = 0;
  config.seed = 5;
  for (auto _ : state) {
    state.PauseTiming();
    config.iterations = 8;
    state.ResumeTiming();
    benchmark::DoNotOptimize(run_chain(config, sim.train));
  }
  state.SetItemsProcessed(state.iterations() * 8);
}
BENCHMARK(BM_ChainIterationDense)->Arg(100)->Arg(200)->Unit(benchmark::kMillisecond);
