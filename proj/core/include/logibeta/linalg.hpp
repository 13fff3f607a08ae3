#ifndef LOGIBETA_LINALG_HPP
#define LOGIBETA_LINALG_HPP

// Dense-Gaussian helpers shared by the samplers.

#include <Eigen/Dense>
#include <stdexcept>

#include "logibeta/rng.hpp"

namespace logibeta {

// Cholesky with diagonal jitter escalation 1e-10 -> 1e-6 (steps of 10).
// Throws std::runtime_error if the matrix is still not positive definite
// at the largest jitter.
inline Eigen::LLT<Eigen::MatrixXd> chol_with_jitter(Eigen::MatrixXd a) {
  Eigen::LLT<Eigen::MatrixXd> llt(a);
  if (llt.info() == Eigen::Success) return llt;
  for (double jitter = 1e-10; jitter <= 1.0000001e-6; jitter *= 10.0) {
    Eigen::MatrixXd aj = a;
    aj.diagonal().array() += jitter;
    llt.compute(aj);
    if (llt.info() == Eigen::Success) return llt;
  }
  throw std::runtime_error("chol_with_jitter: matrix not positive definite within jitter budget");
}

inline double log_det_from_chol(const Eigen::LLT<Eigen::MatrixXd>& llt) {
  return 2.0 * llt.matrixLLT().diagonal().array().log().sum();
}

inline Eigen::VectorXd standard_normal_vector(int n, Rng& rng) {
  Eigen::VectorXd z(n);
  for (int i = 0; i < n; ++i) z(i) = rnorm(rng);
  return z;
}

// Draw from N(mean, Sigma) given the Cholesky of the covariance.
inline Eigen::VectorXd sample_mvn_cov_chol(const Eigen::VectorXd& mean,
                                           const Eigen::LLT<Eigen::MatrixXd>& cov_llt, Rng& rng) {
  return mean + cov_llt.matrixL() * standard_normal_vector(static_cast<int>(mean.size()), rng);
}

// Draw from N(mean, P^{-1}) given the Cholesky of the precision P = L L^T:
// x = mean + L^{-T} z.
inline Eigen::VectorXd sample_mvn_prec_chol(const Eigen::VectorXd& mean,
                                            const Eigen::LLT<Eigen::MatrixXd>& prec_llt, Rng& rng) {
  Eigen::VectorXd z = standard_normal_vector(static_cast<int>(mean.size()), rng);
  return mean + prec_llt.matrixU().solve(z);
}

// ln N(x; mean, Sigma) given the Cholesky of Sigma.
inline double mvn_log_density_cov_chol(const Eigen::VectorXd& x, const Eigen::VectorXd& mean,
                                       const Eigen::LLT<Eigen::MatrixXd>& cov_llt) {
  static constexpr double kLog2Pi = 1.8378770664093454836;
  const Eigen::VectorXd w = cov_llt.matrixL().solve(x - mean);
  return -0.5 * (x.size() * kLog2Pi + log_det_from_chol(cov_llt) + w.squaredNorm());
}

}  // namespace logibeta

#endif
