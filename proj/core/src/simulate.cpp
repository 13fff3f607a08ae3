#include "logibeta/simulate.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "logibeta/linalg.hpp"
#include "logibeta/special_math.hpp"

namespace logibeta {

namespace {

double normal_pdf(double y, double mu, double sd) {
  const double z = (y - mu) / sd;
  return std::exp(-0.5 * z * z) / (sd * std::sqrt(2.0 * std::numbers::pi));
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z * std::numbers::sqrt2 / 2.0); }

}  // namespace

BinarySimulation simulate_cosine600(std::uint64_t seed) {
  constexpr int n = 600;
  Rng rng(seed);
  BinarySimulation out;
  out.train.x.resize(n, 1);
  out.train.z.resize(n);
  out.train_prob.resize(n);
  for (int i = 0; i < n; ++i) {
    const double x = 3.0 * runif(rng);
    out.train.x(i, 0) = x;
    out.train_prob(i) = logistic(std::cos(std::numbers::pi * x));
    out.train.z(i) = runif(rng) < out.train_prob(i) ? 1 : 0;
  }
  return out;
}

BinarySimulation simulate_spatial_binary(SpatialTruth truth, double range, int n_train,
                                         int n_test, std::uint64_t seed) {
  if (n_train < 1 || n_test < 0) throw std::invalid_argument("simulate_spatial_binary: sizes");
  const int n = n_train + n_test;
  Rng rng(seed);
  Points x(n, 2);
  for (int i = 0; i < n; ++i) {
    x(i, 0) = runif(rng);
    x(i, 1) = runif(rng);
  }
  const MaternKernel kernel(range, 1.5);
  Eigen::VectorXd prob(n);
  if (truth == SpatialTruth::kLbp) {
    const LBPRealization real = sample_lbp(ShapePair{1.0, 2.0}, kernel, x, rng);
    for (int i = 0; i < n; ++i) prob(i) = logistic(real.eta(i));
  } else {
    const auto llt = chol_with_jitter(build_matrix(kernel, x).dense);
    const Eigen::VectorXd zeta = llt.matrixL() * standard_normal_vector(n, rng);
    for (int i = 0; i < n; ++i) {
      // Beta(1,2) quantile: F^{-1}(u) = 1 - (1-u)^{1/2}
      const double u = normal_cdf(zeta(i));
      prob(i) = 1.0 - std::sqrt(1.0 - u);
    }
  }
  BinarySimulation out;
  out.train.x = x.topRows(n_train);
  out.test.x = x.bottomRows(n_test);
  out.train_prob = prob.head(n_train);
  out.test_prob = prob.tail(n_test);
  out.train.z.resize(n_train);
  out.test.z.resize(n_test);
  for (int i = 0; i < n_train; ++i) out.train.z(i) = runif(rng) < prob(i) ? 1 : 0;
  for (int i = 0; i < n_test; ++i) out.test.z(i) = runif(rng) < prob(n_train + i) ? 1 : 0;
  return out;
}

ScenarioARow scenario_a_params(double x) {
  return {std::exp(-2.0 * x), x, 0.1, x * x * x * x, 0.2};
}

ScenarioBRow scenario_b_params(double x) {
  if (x <= 2.0) return {0.0, 0.2};
  if (x <= 5.0) return {2.0 * x - 4.0, 0.05};
  return {6.0, std::sqrt((x - 5.0) * (x - 5.0) / 15.0 + 0.01)};
}

RegressionDataset simulate_scenario_a(int n, std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("simulate_scenario_a: n must be >= 1");
  Rng rng(seed);
  RegressionDataset out;
  out.x.resize(n);
  out.y.resize(n);
  for (int i = 0; i < n; ++i) {
    const double x = runif(rng);
    const ScenarioARow p = scenario_a_params(x);
    out.x(i) = x;
    if (runif(rng) < p.w1) {
      out.y(i) = p.mu1 + p.sd1 * rnorm(rng);
    } else {
      out.y(i) = p.mu2 + p.sd2 * rnorm(rng);
    }
  }
  return out;
}

RegressionDataset simulate_scenario_b(int n, std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("simulate_scenario_b: n must be >= 1");
  Rng rng(seed);
  RegressionDataset out;
  out.x.resize(n);
  out.y.resize(n);
  for (int i = 0; i < n; ++i) {
    const double x = -2.0 + 12.0 * runif(rng);
    const ScenarioBRow p = scenario_b_params(x);
    out.x(i) = x;
    out.y(i) = p.mu + p.sd * rnorm(rng);
  }
  return out;
}

double scenario_a_density(double y, double x) {
  const ScenarioARow p = scenario_a_params(x);
  return p.w1 * normal_pdf(y, p.mu1, p.sd1) + (1.0 - p.w1) * normal_pdf(y, p.mu2, p.sd2);
}

double scenario_a_mean(double x) {
  const ScenarioARow p = scenario_a_params(x);
  return p.w1 * p.mu1 + (1.0 - p.w1) * p.mu2;
}

double scenario_b_density(double y, double x) {
  const ScenarioBRow p = scenario_b_params(x);
  return normal_pdf(y, p.mu, p.sd);
}

double scenario_b_mean(double x) { return scenario_b_params(x).mu; }

Standardizer Standardizer::fit(const RegressionDataset& data) {
  validate_dataset(data);
  Standardizer s;
  const int n = data.size();
  s.mean_x = data.x.mean();
  s.mean_y = data.y.mean();
  s.sd_x = std::sqrt((data.x.array() - s.mean_x).square().sum() / (n - 1));
  s.sd_y = std::sqrt((data.y.array() - s.mean_y).square().sum() / (n - 1));
  if (!(s.sd_x > 0.0)) s.sd_x = 1.0;
  if (!(s.sd_y > 0.0)) s.sd_y = 1.0;
  return s;
}

RegressionDataset Standardizer::apply(const RegressionDataset& data) const {
  RegressionDataset out;
  out.x = (data.x.array() - mean_x) / sd_x;
  out.y = (data.y.array() - mean_y) / sd_y;
  return out;
}

}  // namespace logibeta
