#include "logibeta/logistic_beta.hpp"

#include <cmath>
#include <stdexcept>

#include "logibeta/linalg.hpp"
#include "logibeta/special_math.hpp"

namespace logibeta {

double lb_log_density(double eta, const ShapePair& shape) {
  validate_shape(shape);
  return shape.a * log_logistic(eta) + shape.b * log_logistic(-eta) -
         log_beta(shape.a, shape.b);
}

MVLBSample sample_mvlb(const ShapePair& shape, const CorrelationMatrix& R, Rng& rng,
                       int polya_truncation) {
  validate_shape(shape);
  const int n = R.size();
  const double lambda = sample_polya(shape, polya_truncation, rng).lambda;
  const double m = 0.5 * lambda * (shape.a - shape.b);
  const double s = std::sqrt(lambda);
  Eigen::VectorXd eta;
  if (R.has_low_rank()) {
    const Eigen::MatrixXd& w = *R.factor;
    eta = w * standard_normal_vector(static_cast<int>(w.cols()), rng);
    if (R.diag_rem && !R.diag_rem->isZero(0.0)) {
      for (int i = 0; i < n; ++i) eta(i) += std::sqrt((*R.diag_rem)(i)) * rnorm(rng);
    }
    eta = (m + s * eta.array()).matrix();
  } else {
    const auto llt = chol_with_jitter(R.dense);
    const Eigen::VectorXd noise = llt.matrixL() * standard_normal_vector(n, rng);
    eta = Eigen::VectorXd::Constant(n, m) + s * noise;
  }
  return {std::move(eta), lambda};
}

MVLBMoments mvlb_moments(const ShapePair& shape, double r_ij) {
  validate_shape(shape);
  if (!(r_ij >= -1.0 && r_ij <= 1.0)) {
    throw std::invalid_argument("mvlb_moments: R_ij must lie in [-1, 1]");
  }
  const double a = shape.a, b = shape.b;
  MVLBMoments out;
  out.mean = digamma(a) - digamma(b);
  out.variance = trigamma(a) + trigamma(b);
  if (std::abs(a - b) < 1e-9) {
    out.covariance = 2.0 * trigamma(0.5 * (a + b)) * r_ij;
  } else {
    out.covariance = out.variance + 2.0 * (r_ij - 1.0) * (digamma(a) - digamma(b)) / (a - b);
  }
  return out;
}

CorrRange corr_range(const ShapePair& shape) {
  validate_shape(shape);
  const double a = shape.a, b = shape.b;
  if (std::abs(a - b) < 1e-9) return {-1.0, 1.0};
  const double lower =
      1.0 - 4.0 * (digamma(a) - digamma(b)) / ((a - b) * (trigamma(a) + trigamma(b)));
  return {lower, 1.0};
}

LBPRealization sample_lbp(const ShapePair& shape, const CorrelationKernel& kernel,
                          const Points& points, Rng& rng, int polya_truncation) {
  validate_shape(shape);
  if (points.rows() < 1) throw std::invalid_argument("sample_lbp: empty point list");
  LBPRealization out;
  out.points = points;
  out.kernel = std::shared_ptr<const CorrelationKernel>(kernel.clone());
  const CorrelationMatrix R = build_matrix(kernel, points);
  if (R.factor_is_exact()) {
    // hierarchical path: lambda ~ Polya, gamma ~ N(0, I_q),
    // eta = 0.5 lambda (a-b) 1 + sqrt(lambda) Phi gamma
    out.lambda = sample_polya(shape, polya_truncation, rng).lambda;
    Eigen::VectorXd gamma = standard_normal_vector(static_cast<int>(R.factor->cols()), rng);
    const double m = 0.5 * out.lambda * (shape.a - shape.b);
    out.eta = (m + std::sqrt(out.lambda) * (*R.factor * gamma).array()).matrix();
    out.gamma = std::move(gamma);
  } else {
    MVLBSample s = sample_mvlb(shape, R, rng, polya_truncation);
    out.eta = std::move(s.eta);
    out.lambda = s.lambda;
  }
  return out;
}

Eigen::VectorXd linear_predictor_offset(const ShapePair& shape, const Eigen::MatrixXd& phi) {
  validate_shape(shape);
  const double c = digamma(shape.a) - digamma(shape.b);
  return c * (Eigen::VectorXd::Ones(phi.rows()) - phi * Eigen::VectorXd::Ones(phi.cols()));
}

GaussianConditional lbp_conditional_gaussian(const LBPRealization& realized,
                                             const ShapePair& shape, const Points& new_points) {
  validate_shape(shape);
  if (!realized.kernel) throw std::invalid_argument("lbp_conditional_gaussian: missing kernel");
  const CorrelationKernel& kernel = *realized.kernel;
  const double m = 0.5 * realized.lambda * (shape.a - shape.b);
  const int n_new = static_cast<int>(new_points.rows());

  if (realized.gamma) {
    // coefficient-space realization determines eta everywhere
    const auto phi_new = kernel.feature_rows(new_points);
    if (phi_new) {
      GaussianConditional out;
      out.mean = (m + std::sqrt(realized.lambda) * (*phi_new * *realized.gamma).array()).matrix();
      out.cov = Eigen::MatrixXd::Zero(n_new, n_new);
      return out;
    }
  }

  const Eigen::MatrixXd r_tt = build_matrix(kernel, realized.points).dense;
  const Eigen::MatrixXd r_st = cross_matrix(kernel, new_points, realized.points);
  const Eigen::MatrixXd r_ss = build_matrix(kernel, new_points).dense;
  const auto llt = chol_with_jitter(r_tt);
  const Eigen::MatrixXd solved = llt.solve(r_st.transpose());  // R^{-1} R_*^T
  GaussianConditional out;
  out.mean = Eigen::VectorXd::Constant(n_new, m) +
             solved.transpose() * (realized.eta.array() - m).matrix();
  out.cov = realized.lambda * (r_ss - r_st * solved);
  return out;
}

// ----------------------------------------------------------------------------
// Regularized incomplete beta via the standard continued fraction
// (modified Lentz evaluation).
// ----------------------------------------------------------------------------

namespace {

double beta_continued_fraction(double a, double b, double x) {
  constexpr int kMaxIter = 500;
  constexpr double kEps = 3e-16;
  constexpr double kTiny = 1e-300;
  const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kEps) break;
  }
  return h;
}

}  // namespace

double beta_cdf(double x, double a, double b) {
  if (!(a > 0.0) || !(b > 0.0)) throw std::domain_error("beta_cdf: shapes must be positive");
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double log_bt = a * std::log(x) + b * std::log1p(-x) - log_beta(a, b);
  if (x < (a + 1.0) / (a + b + 2.0)) {
    return std::exp(log_bt) * beta_continued_fraction(a, b, x) / a;
  }
  return 1.0 - std::exp(log_bt) * beta_continued_fraction(b, a, 1.0 - x) / b;
}

}  // namespace logibeta
