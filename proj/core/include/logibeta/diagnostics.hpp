#ifndef LOGIBETA_DIAGNOSTICS_HPP
#define LOGIBETA_DIAGNOSTICS_HPP

// MCMC efficiency diagnostics and the error metrics of the simulation
// harness. Everything here is computed from chain output only.

#include <Eigen/Dense>
#include <string>
#include <utility>
#include <vector>

namespace logibeta {

struct EssResult {
  double ess = 0.0;
  bool degenerate = false;  // constant trace; ess reported as n by convention
};

// Univariate effective sample size via a Yule-Walker AR fit with AIC order
// selection: ESS = n * var / spec0 with spec0 the spectral density at
// frequency zero, sigma^2/(1 - sum phi)^2. Needs length >= 100.
EssResult ess_univariate(const Eigen::VectorXd& trace);

// Batch-means multivariate ESS, batch size floor(sqrt(n)):
// mESS = n (det Lambda / det Sigma_bm)^{1/p}. Throws std::runtime_error
// naming the offending coordinates when the sample covariance is singular.
double ess_multivariate(const Eigen::MatrixXd& traces);

// Empirical-CDF continuous ranked probability score,
// mean_i |s_i - truth| - 0.5 mean_{ij} |s_i - s_j|, in O(m log m).
double crps_empirical(const Eigen::VectorXd& samples, double truth);

struct ErrorPair {
  double density_error = 0.0;
  double regression_error = 0.0;
};

// density error: mean over test x of sum_g |p_hat - p| dy;
// regression error: [mean over test x of (m_hat - m)^2]^{1/2}.
// Densities are (n_test x n_grid) matrices on matching grids.
ErrorPair density_and_regression_errors(const Eigen::MatrixXd& density_est,
                                        const Eigen::MatrixXd& density_truth,
                                        const Eigen::VectorXd& mean_est,
                                        const Eigen::VectorXd& mean_truth, double dy);

// Type-7 empirical quantile.
double empirical_quantile(Eigen::VectorXd values, double p);

struct DiagnosticsReport {
  std::vector<std::pair<std::string, double>> parameter_ess;
  double multivariate_ess = 0.0;
  double lambda_acceptance_rate = 0.0;
  double ab_acceptance_rate = 0.0;
  double wall_seconds = 0.0;
  // vs-truth metrics; NaN when no truth was supplied
  double rmse = 0.0;
  double mae = 0.0;
  double mean_crps = 0.0;
  double density_error = 0.0;
  double regression_error = 0.0;
};

}  // namespace logibeta

#endif
