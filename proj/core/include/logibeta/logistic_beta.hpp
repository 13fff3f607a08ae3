#ifndef LOGIBETA_LOGISTIC_BETA_HPP
#define LOGIBETA_LOGISTIC_BETA_HPP

// Univariate and multivariate logistic-beta distributions and
// logistic-beta process realizations.

#include <Eigen/Dense>
#include <memory>
#include <optional>

#include "logibeta/kernels.hpp"
#include "logibeta/polya.hpp"

namespace logibeta {

// a ln sigma(eta) + b ln sigma(-eta) - ln B(a,b), stable for |eta| <= 700.
double lb_log_density(double eta, const ShapePair& shape);

struct MVLBSample {
  Eigen::VectorXd eta;
  double lambda = 0.0;
};

// eta | lambda ~ N(0.5 lambda (a-b) 1, lambda R), lambda ~ Polya(a,b).
// Uses the factored path when R carries a low-rank structure.
MVLBSample sample_mvlb(const ShapePair& shape, const CorrelationMatrix& R, Rng& rng,
                       int polya_truncation = kDefaultPolyaTruncation);

struct MVLBMoments {
  double mean = 0.0;
  double variance = 0.0;
  double covariance = 0.0;
};

// First two moments: mean psi(a)-psi(b), variance psi'(a)+psi'(b),
// covariance 2 psi'(a) R_ij when a = b and
// psi'(a)+psi'(b)+2(R_ij - 1){psi(a)-psi(b)}/(a-b) otherwise.
MVLBMoments mvlb_moments(const ShapePair& shape, double r_ij);

struct CorrRange {
  double lower = -1.0;
  double upper = 1.0;
};

// Attainable correlation range: [-1, 1] when a = b, otherwise the lower
// bound is 1 - 4{psi(a)-psi(b)}/[(a-b){psi'(a)+psi'(b)}].
CorrRange corr_range(const ShapePair& shape);

struct LBPRealization {
  Points points;
  Eigen::VectorXd eta;
  double lambda = 0.0;
  std::shared_ptr<const CorrelationKernel> kernel;
  // Hierarchical coefficients, present when the kernel factors exactly
  // (then eta = 0.5 lambda (a-b) 1 + sqrt(lambda) Phi gamma).
  std::optional<Eigen::VectorXd> gamma;
};

// Finite-dimensional LBP draw at the given points. Feature-map kernels go
// through the hierarchical representation and store gamma; other kernels
// sample the conditional Gaussian directly. The two paths are
// distributionally identical.
LBPRealization sample_lbp(const ShapePair& shape, const CorrelationKernel& kernel,
                          const Points& points, Rng& rng,
                          int polya_truncation = kDefaultPolyaTruncation);

// Offset term of the linear-predictor representation,
// {psi(a)-psi(b)} (1_n - Phi 1_q).
Eigen::VectorXd linear_predictor_offset(const ShapePair& shape, const Eigen::MatrixXd& phi);

struct GaussianConditional {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;
};

// Conditional law of eta at new points given (lambda, eta at the realized
// points): mean 0.5 lambda (a-b) 1 + R_* R^{-1} (eta - 0.5 lambda (a-b) 1),
// covariance lambda (R_** - R_* R^{-1} R_*^T). Realizations carrying gamma
// use the exact coefficient-space path (zero conditional variance).
GaussianConditional lbp_conditional_gaussian(const LBPRealization& realized,
                                             const ShapePair& shape, const Points& new_points);

// Regularized incomplete beta function I_x(a,b) via continued fractions.
// Test infrastructure for the KS checks against Beta marginals.
double beta_cdf(double x, double a, double b);

}  // namespace logibeta

#endif
