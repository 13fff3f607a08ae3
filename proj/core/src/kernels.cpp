#include "logibeta/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "logibeta/linalg.hpp"
#include "logibeta/special_math.hpp"

namespace logibeta {

double matern(double d, double rho, double nu) {
  if (d < 0.0) throw std::domain_error("matern: distance must be nonnegative");
  if (!(rho > 0.0) || !(nu > 0.0)) throw std::domain_error("matern: rho and nu must be positive");
  const double t = d / rho;
  if (t < 1e-8) return 1.0;  // 1 - O(t^2); avoids 0 * inf at the origin
  const double log_pref = (1.0 - nu) * std::log(2.0) - std::lgamma(nu) + nu * std::log(t);
  const double k = bessel_k(nu, t);
  if (k <= 0.0) return 0.0;  // K_nu underflowed at large distance
  return std::exp(log_pref + std::log(k));
}

double ar1(int t, int t_prime, double rho) {
  if (!(rho > -1.0 && rho < 1.0)) throw std::domain_error("ar1: rho must lie in (-1, 1)");
  const int lag = std::abs(t - t_prime);
  return std::pow(rho, lag);
}

// ----------------------------------------------------------------------------
// Natural cubic spline basis: N_1 = 1, N_2 = x,
// N_{k+2}(x) = d_k(x) - d_{K-1}(x) with
// d_k(x) = [(x - xi_k)_+^3 - (x - xi_K)_+^3] / (xi_K - xi_k).
// ----------------------------------------------------------------------------

namespace {

double cube_pos(double v) { return v > 0.0 ? v * v * v : 0.0; }

}  // namespace

Eigen::VectorXd BasisSpec::eval_unnormalized(double x) const {
  const int K = dimension();
  if (K < 1) throw std::invalid_argument("BasisSpec: empty knot list");
  if (K == 1) return Eigen::VectorXd::Ones(1);  // intercept-only basis
  Eigen::VectorXd phi(K);
  phi(0) = 1.0;
  phi(1) = x;
  const double xi_last = knots(K - 1);
  auto d = [&](int k) {
    return (cube_pos(x - knots(k)) - cube_pos(x - xi_last)) / (xi_last - knots(k));
  };
  const double d_ref = d(K - 2);
  for (int k = 0; k + 2 < K; ++k) phi(k + 2) = d(k) - d_ref;
  return phi;
}

BasisSpec natural_spline_basis(double lo, double hi, int df) {
  if (!(hi > lo)) throw std::invalid_argument("natural_spline_basis: need hi > lo");
  if (df < 2) throw std::invalid_argument("natural_spline_basis: need df >= 2");
  Eigen::VectorXd knots = Eigen::VectorXd::LinSpaced(df, lo, hi);
  return BasisSpec{std::move(knots)};
}

BasisSpec natural_spline_basis_from_quantiles(const Eigen::VectorXd& x, int df) {
  if (x.size() < 2) throw std::invalid_argument("natural_spline_basis_from_quantiles: need data");
  if (df < 2) throw std::invalid_argument("natural_spline_basis_from_quantiles: need df >= 2");
  std::vector<double> sorted(x.data(), x.data() + x.size());
  std::sort(sorted.begin(), sorted.end());
  Eigen::VectorXd knots(df);
  const auto n = static_cast<double>(sorted.size());
  for (int k = 0; k < df; ++k) {
    const double q = static_cast<double>(k) / (df - 1);
    const double pos = q * (n - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min<std::size_t>(lo + 1, sorted.size() - 1);
    const double w = pos - static_cast<double>(lo);
    knots(k) = (1.0 - w) * sorted[lo] + w * sorted[hi];
  }
  // de-duplicate coincident quantiles by nudging
  for (int k = 1; k < df; ++k) {
    if (knots(k) <= knots(k - 1)) knots(k) = knots(k - 1) + 1e-10;
  }
  return BasisSpec{std::move(knots)};
}

Eigen::VectorXd feature_map_eval(const BasisSpec& spec, double x) {
  Eigen::VectorXd phi = spec.eval_unnormalized(x);
  const double norm = phi.norm();
  if (!(norm > 0.0)) throw std::runtime_error("feature_map_eval: zero-norm unnormalized basis");
  return phi / norm;
}

// ----------------------------------------------------------------------------
// Kernel classes
// ----------------------------------------------------------------------------

CorrelationMatrix CorrelationKernel::matrix(const Points& pts) const {
  const int n = static_cast<int>(pts.rows());
  CorrelationMatrix out;
  out.dense.resize(n, n);
  for (int i = 0; i < n; ++i) {
    out.dense(i, i) = 1.0;
    for (int j = 0; j < i; ++j) {
      const double v = (*this)(pts.row(i), pts.row(j));
      out.dense(i, j) = v;
      out.dense(j, i) = v;
    }
  }
  return out;
}

std::optional<Eigen::MatrixXd> CorrelationKernel::feature_rows(const Points&) const {
  return std::nullopt;
}

MaternKernel::MaternKernel(double range, double smoothness) : range_(range), nu_(smoothness) {
  if (!(range_ > 0.0) || !(nu_ > 0.0)) {
    throw std::invalid_argument("MaternKernel: range and smoothness must be positive");
  }
}

double MaternKernel::operator()(const Eigen::RowVectorXd& x, const Eigen::RowVectorXd& y) const {
  return matern((x - y).norm(), range_, nu_);
}

std::unique_ptr<CorrelationKernel> MaternKernel::clone() const {
  return std::make_unique<MaternKernel>(*this);
}

Ar1Kernel::Ar1Kernel(double rho) : rho_(rho) {
  if (!(rho_ > -1.0 && rho_ < 1.0)) throw std::invalid_argument("Ar1Kernel: rho must be in (-1,1)");
}

double Ar1Kernel::operator()(const Eigen::RowVectorXd& x, const Eigen::RowVectorXd& y) const {
  return std::pow(rho_, std::abs(x(0) - y(0)));
}

std::unique_ptr<CorrelationKernel> Ar1Kernel::clone() const {
  return std::make_unique<Ar1Kernel>(*this);
}

FeatureMapKernel::FeatureMapKernel(BasisSpec spec) : spec_(std::move(spec)) {
  if (spec_.dimension() < 1) throw std::invalid_argument("FeatureMapKernel: empty basis");
}

double FeatureMapKernel::operator()(const Eigen::RowVectorXd& x,
                                    const Eigen::RowVectorXd& y) const {
  return feature_map_eval(spec_, x(0)).dot(feature_map_eval(spec_, y(0)));
}

std::optional<Eigen::MatrixXd> FeatureMapKernel::feature_rows(const Points& pts) const {
  const int n = static_cast<int>(pts.rows());
  Eigen::MatrixXd phi(n, spec_.dimension());
  for (int i = 0; i < n; ++i) phi.row(i) = feature_map_eval(spec_, pts(i, 0)).transpose();
  return phi;
}

CorrelationMatrix FeatureMapKernel::matrix(const Points& pts) const {
  CorrelationMatrix out;
  Eigen::MatrixXd phi = *feature_rows(pts);
  out.dense = phi * phi.transpose();
  out.dense.diagonal().setOnes();
  out.diag_rem = Eigen::VectorXd::Zero(pts.rows());
  out.factor = std::move(phi);
  return out;
}

std::unique_ptr<CorrelationKernel> FeatureMapKernel::clone() const {
  return std::make_unique<FeatureMapKernel>(spec_);
}

ModifiedPredictiveProcessKernel::ModifiedPredictiveProcessKernel(
    std::unique_ptr<CorrelationKernel> parent, Points knots)
    : parent_(std::move(parent)), knots_(std::move(knots)) {
  if (!parent_) throw std::invalid_argument("ModifiedPredictiveProcessKernel: null parent");
  if (knots_.rows() < 1) throw std::invalid_argument("ModifiedPredictiveProcessKernel: no knots");
  knot_llt_ = chol_with_jitter(parent_->matrix(knots_).dense);
}

Eigen::MatrixXd ModifiedPredictiveProcessKernel::cross_with_knots(const Points& pts) const {
  return cross_matrix(*parent_, pts, knots_);
}

double ModifiedPredictiveProcessKernel::operator()(const Eigen::RowVectorXd& x,
                                                   const Eigen::RowVectorXd& y) const {
  const int q = static_cast<int>(knots_.rows());
  Eigen::VectorXd rx(q), ry(q);
  for (int k = 0; k < q; ++k) {
    rx(k) = (*parent_)(x, knots_.row(k));
    ry(k) = (*parent_)(y, knots_.row(k));
  }
  const double v = rx.dot(knot_llt_.solve(ry));
  if (x == y) return v + (1.0 - v);
  return v;
}

CorrelationMatrix ModifiedPredictiveProcessKernel::matrix(const Points& pts) const {
  const int n = static_cast<int>(pts.rows());
  const Eigen::MatrixXd r_xu = cross_with_knots(pts);
  // W = R_xu L^{-T}, so W W^T = R_xu R_uu^{-1} R_ux
  Eigen::MatrixXd w = knot_llt_.matrixL().solve(r_xu.transpose()).transpose();
  Eigen::VectorXd d(n);
  for (int i = 0; i < n; ++i) d(i) = std::max(0.0, 1.0 - w.row(i).squaredNorm());
  CorrelationMatrix out;
  out.dense = w * w.transpose();
  out.dense.diagonal().setOnes();
  out.factor = std::move(w);
  out.diag_rem = std::move(d);
  return out;
}

std::unique_ptr<CorrelationKernel> ModifiedPredictiveProcessKernel::clone() const {
  return std::make_unique<ModifiedPredictiveProcessKernel>(parent_->clone(), knots_);
}

Eigen::MatrixXd cross_matrix(const CorrelationKernel& kernel, const Points& a, const Points& b) {
  Eigen::MatrixXd out(a.rows(), b.rows());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < b.rows(); ++j) out(i, j) = kernel(a.row(i), b.row(j));
  }
  return out;
}

CorrelationMatrix build_matrix(const CorrelationKernel& kernel, const Points& pts) {
  if (pts.rows() < 1) throw std::invalid_argument("build_matrix: empty point list");
  return kernel.matrix(pts);
}

}  // namespace logibeta
