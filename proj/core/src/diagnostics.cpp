#include "logibeta/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace logibeta {

EssResult ess_univariate(const Eigen::VectorXd& trace) {
  const int n = static_cast<int>(trace.size());
  if (n < 100) throw std::invalid_argument("ess_univariate: need trace length >= 100");
  const double mean = trace.mean();
  const Eigen::VectorXd centered = trace.array() - mean;
  const double var = centered.squaredNorm() / (n - 1);
  if (var < 1e-300) return {static_cast<double>(n), true};

  const int order_max =
      std::min(n - 1, static_cast<int>(std::floor(10.0 * std::log10(static_cast<double>(n)))));
  Eigen::VectorXd acov(order_max + 1);
  for (int k = 0; k <= order_max; ++k) {
    double s = 0.0;
    for (int t = 0; t + k < n; ++t) s += centered(t) * centered(t + k);
    acov(k) = s / n;
  }

  // Levinson-Durbin with AIC order selection (order 0 = white noise allowed)
  std::vector<double> phi_prev(order_max + 1, 0.0), phi_cur(order_max + 1, 0.0);
  double sigma2 = acov(0);
  double best_aic = n * std::log(sigma2);
  double best_sigma2 = sigma2;
  double best_phi_sum = 0.0;
  for (int k = 1; k <= order_max; ++k) {
    double num = acov(k);
    for (int j = 1; j < k; ++j) num -= phi_prev[j] * acov(k - j);
    const double refl = num / sigma2;
    phi_cur[k] = refl;
    for (int j = 1; j < k; ++j) phi_cur[j] = phi_prev[j] - refl * phi_prev[k - j];
    sigma2 *= (1.0 - refl * refl);
    if (sigma2 <= 0.0) break;
    const double aic = n * std::log(sigma2) + 2.0 * k;
    if (aic < best_aic) {
      best_aic = aic;
      best_sigma2 = sigma2;
      best_phi_sum = 0.0;
      for (int j = 1; j <= k; ++j) best_phi_sum += phi_cur[j];
    }
    std::swap(phi_prev, phi_cur);
  }
  const double denom = 1.0 - best_phi_sum;
  const double spec0 = best_sigma2 / (denom * denom);
  return {n * var / spec0, false};
}

double ess_multivariate(const Eigen::MatrixXd& traces) {
  const int n = static_cast<int>(traces.rows());
  const int p = static_cast<int>(traces.cols());
  if (p < 1) throw std::invalid_argument("ess_multivariate: need p >= 1");
  if (n < 100) throw std::invalid_argument("ess_multivariate: need n >= 100");

  const Eigen::RowVectorXd mean = traces.colwise().mean();
  const Eigen::MatrixXd centered = traces.rowwise() - mean;
  const Eigen::MatrixXd lambda = centered.transpose() * centered / (n - 1);

  // singularity check with coordinate names
  for (int j = 0; j < p; ++j) {
    if (lambda(j, j) < 1e-300) {
      throw std::runtime_error("ess_multivariate: coordinate " + std::to_string(j) +
                               " has zero variance");
    }
  }
  for (int i = 0; i < p; ++i) {
    for (int j = 0; j < i; ++j) {
      const double c = lambda(i, j) / std::sqrt(lambda(i, i) * lambda(j, j));
      if (std::abs(c) > 1.0 - 1e-12) {
        throw std::runtime_error("ess_multivariate: coordinates " + std::to_string(j) + " and " +
                                 std::to_string(i) + " are perfectly correlated");
      }
    }
  }
  Eigen::LLT<Eigen::MatrixXd> lambda_llt(lambda);
  if (lambda_llt.info() != Eigen::Success) {
    throw std::runtime_error("ess_multivariate: singular sample covariance");
  }

  const int b = static_cast<int>(std::floor(std::sqrt(static_cast<double>(n))));
  const int a = n / b;
  Eigen::MatrixXd batch_means(a, p);
  for (int k = 0; k < a; ++k) {
    batch_means.row(k) = traces.middleRows(k * b, b).colwise().mean();
  }
  const Eigen::RowVectorXd grand = traces.topRows(a * b).colwise().mean();
  const Eigen::MatrixXd bc = batch_means.rowwise() - grand;
  const Eigen::MatrixXd sigma_bm = static_cast<double>(b) / (a - 1) * (bc.transpose() * bc);
  Eigen::LLT<Eigen::MatrixXd> bm_llt(sigma_bm);
  if (bm_llt.info() != Eigen::Success) {
    throw std::runtime_error("ess_multivariate: singular batch-means covariance");
  }
  const double log_det_lambda =
      2.0 * lambda_llt.matrixLLT().diagonal().array().log().sum();
  const double log_det_bm = 2.0 * bm_llt.matrixLLT().diagonal().array().log().sum();
  return n * std::exp((log_det_lambda - log_det_bm) / p);
}

double crps_empirical(const Eigen::VectorXd& samples, double truth) {
  const auto m = samples.size();
  if (m < 1) throw std::invalid_argument("crps_empirical: empty samples");
  std::vector<double> s(samples.data(), samples.data() + m);
  std::sort(s.begin(), s.end());
  double abs_term = 0.0;
  double pair_sum = 0.0;  // sum over ordered pairs of |s_i - s_j|
  for (std::size_t k = 0; k < s.size(); ++k) {
    abs_term += std::abs(s[k] - truth);
    pair_sum += s[k] * (2.0 * static_cast<double>(k) - static_cast<double>(m) + 1.0);
  }
  abs_term /= static_cast<double>(m);
  const double pair_mean = 2.0 * pair_sum / (static_cast<double>(m) * static_cast<double>(m));
  return abs_term - 0.5 * pair_mean;
}

ErrorPair density_and_regression_errors(const Eigen::MatrixXd& density_est,
                                        const Eigen::MatrixXd& density_truth,
                                        const Eigen::VectorXd& mean_est,
                                        const Eigen::VectorXd& mean_truth, double dy) {
  if (density_est.rows() != density_truth.rows() || density_est.cols() != density_truth.cols()) {
    throw std::invalid_argument("density_and_regression_errors: density grid mismatch");
  }
  if (mean_est.size() != mean_truth.size() || mean_est.size() != density_est.rows()) {
    throw std::invalid_argument("density_and_regression_errors: mean grid mismatch");
  }
  ErrorPair out;
  out.density_error = (density_est - density_truth).cwiseAbs().rowwise().sum().mean() * dy;
  out.regression_error = std::sqrt((mean_est - mean_truth).squaredNorm() / mean_est.size());
  return out;
}

double empirical_quantile(Eigen::VectorXd values, double p) {
  if (values.size() < 1) throw std::invalid_argument("empirical_quantile: empty input");
  std::vector<double> v(values.data(), values.data() + values.size());
  std::sort(v.begin(), v.end());
  const auto n = v.size();
  if (n == 1) return v[0];
  const double pos = p * static_cast<double>(n - 1);
  const auto lo = static_cast<std::size_t>(pos);
  const auto hi = std::min(lo + 1, n - 1);
  const double w = pos - static_cast<double>(lo);
  return (1.0 - w) * v[lo] + w * v[hi];
}

}  // namespace logibeta
