#ifndef LOGIBETA_SIMULATE_HPP
#define LOGIBETA_SIMULATE_HPP

// Data-generation scenarios for the simulation studies, plus the
// center/scale transform applied before density-regression fits.

#include <cstdint>

#include "logibeta/binary_regression.hpp"
#include "logibeta/ddp_mixture.hpp"

namespace logibeta {

struct BinarySimulation {
  BinaryDataset train;
  BinaryDataset test;
  Eigen::VectorXd train_prob;  // latent success probabilities
  Eigen::VectorXd test_prob;
};

// 600 points with x ~ U(0,3) and pr{z = 1} = sigma(cos(pi x)).
BinarySimulation simulate_cosine600(std::uint64_t seed);

enum class SpatialTruth { kLbp, kGaussianCopula };

// Spatial binary data on [0,1]^2. kLbp: probabilities sigma(eta) with
// eta ~ LBP(1,2, Matern(range, 1.5)); kGaussianCopula: a unit-variance
// Gaussian field pushed through F_Beta(1,2)^{-1}(Phi(.)).
BinarySimulation simulate_spatial_binary(SpatialTruth truth, double range, int n_train,
                                         int n_test, std::uint64_t seed);

// Scenario A: x ~ U(0,1),
// y ~ e^{-2x} N(x, 0.1^2) + (1 - e^{-2x}) N(x^4, 0.2^2).
RegressionDataset simulate_scenario_a(int n, std::uint64_t seed);

// Scenario B: x ~ U(-2,10), three branches over x.
RegressionDataset simulate_scenario_b(int n, std::uint64_t seed);

double scenario_a_density(double y, double x);
double scenario_a_mean(double x);
double scenario_b_density(double y, double x);
double scenario_b_mean(double x);

struct ScenarioARow {
  double w1, mu1, sd1, mu2, sd2;
};
ScenarioARow scenario_a_params(double x);

struct ScenarioBRow {
  double mu, sd;
};
ScenarioBRow scenario_b_params(double x);

// Center/scale transform fitted on a regression dataset.
struct Standardizer {
  double mean_x = 0.0, sd_x = 1.0;
  double mean_y = 0.0, sd_y = 1.0;

  static Standardizer fit(const RegressionDataset& data);
  RegressionDataset apply(const RegressionDataset& data) const;
  double to_std_x(double x) const { return (x - mean_x) / sd_x; }
  double to_std_y(double y) const { return (y - mean_y) / sd_y; }
  double from_std_y(double y) const { return mean_y + sd_y * y; }
  // densities transform with the Jacobian 1/sd_y
  double density_to_original(double std_density) const { return std_density / sd_y; }
};

}  // namespace logibeta

#endif
