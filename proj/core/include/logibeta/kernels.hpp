#ifndef LOGIBETA_KERNELS_HPP
#define LOGIBETA_KERNELS_HPP

// Correlation kernels and correlation-matrix construction, including the
// low-rank structures used by the scalable sampler paths.

#include <Eigen/Dense>
#include <memory>
#include <optional>

namespace logibeta {

// Evaluation points: one row per location, one column per coordinate.
using Points = Eigen::MatrixXd;

// Matern correlation 2^{1-nu} Gamma(nu)^{-1} (d/rho)^nu K_nu(d/rho); 1 at d = 0.
double matern(double d, double rho, double nu);

// AR(1) correlation rho^{|t - t'|} on integer indices.
double ar1(int t, int t_prime, double rho);

// Natural cubic spline basis over ascending knots (first/last act as the
// boundary knots). The spanned space includes constants and the linear
// term, so the basis dimension equals the number of knots and the
// unnormalized map never has zero norm.
struct BasisSpec {
  Eigen::VectorXd knots;

  int dimension() const { return static_cast<int>(knots.size()); }
  Eigen::VectorXd eval_unnormalized(double x) const;
};

// Equally spaced knots on [lo, hi], df of them.
BasisSpec natural_spline_basis(double lo, double hi, int df);

// Boundary knots at min/max of x, interior knots at quantiles.
BasisSpec natural_spline_basis_from_quantiles(const Eigen::VectorXd& x, int df);

// phi(x) = phi~(x) / ||phi~(x)||_2; throws if the unnormalized norm is zero.
Eigen::VectorXd feature_map_eval(const BasisSpec& spec, double x);

// Correlation matrix with optional "low rank plus diagonal" structure
// R = W W^T + diag(d). Feature-map kernels carry d = 0 and W = Phi;
// modified predictive process kernels carry W = R_xu L^{-T} with
// R_uu = L L^T and d_i = 1 - ||w_i||^2.
struct CorrelationMatrix {
  Eigen::MatrixXd dense;
  std::optional<Eigen::MatrixXd> factor;
  std::optional<Eigen::VectorXd> diag_rem;

  int size() const { return static_cast<int>(dense.rows()); }
  bool has_low_rank() const { return factor.has_value(); }
  // True when R = Phi Phi^T exactly, so realizations can live in the
  // q-dimensional coefficient space.
  bool factor_is_exact() const {
    return factor.has_value() && diag_rem.has_value() && diag_rem->isZero(0.0);
  }
};

class CorrelationKernel {
 public:
  virtual ~CorrelationKernel() = default;
  virtual double operator()(const Eigen::RowVectorXd& x, const Eigen::RowVectorXd& y) const = 0;
  virtual CorrelationMatrix matrix(const Points& pts) const;
  // Phi rows for feature-map kernels; nullopt otherwise.
  virtual std::optional<Eigen::MatrixXd> feature_rows(const Points& pts) const;
  virtual std::unique_ptr<CorrelationKernel> clone() const = 0;
};

class MaternKernel final : public CorrelationKernel {
 public:
  MaternKernel(double range, double smoothness);
  double operator()(const Eigen::RowVectorXd& x, const Eigen::RowVectorXd& y) const override;
  std::unique_ptr<CorrelationKernel> clone() const override;
  double range() const { return range_; }
  double smoothness() const { return nu_; }

 private:
  double range_;
  double nu_;
};

class Ar1Kernel final : public CorrelationKernel {
 public:
  explicit Ar1Kernel(double rho);
  double operator()(const Eigen::RowVectorXd& x, const Eigen::RowVectorXd& y) const override;
  std::unique_ptr<CorrelationKernel> clone() const override;
  double rho() const { return rho_; }

 private:
  double rho_;
};

class FeatureMapKernel final : public CorrelationKernel {
 public:
  explicit FeatureMapKernel(BasisSpec spec);
  double operator()(const Eigen::RowVectorXd& x, const Eigen::RowVectorXd& y) const override;
  CorrelationMatrix matrix(const Points& pts) const override;
  std::optional<Eigen::MatrixXd> feature_rows(const Points& pts) const override;
  std::unique_ptr<CorrelationKernel> clone() const override;
  const BasisSpec& basis() const { return spec_; }

 private:
  BasisSpec spec_;
};

// Modified predictive process: R~(x,x') = r(x)^T R_uu^{-1} r(x') off the
// diagonal, with the diagonal corrected back to exactly 1.
class ModifiedPredictiveProcessKernel final : public CorrelationKernel {
 public:
  ModifiedPredictiveProcessKernel(std::unique_ptr<CorrelationKernel> parent, Points knots);
  double operator()(const Eigen::RowVectorXd& x, const Eigen::RowVectorXd& y) const override;
  CorrelationMatrix matrix(const Points& pts) const override;
  std::unique_ptr<CorrelationKernel> clone() const override;
  const Points& knots() const { return knots_; }
  const CorrelationKernel& parent() const { return *parent_; }

 private:
  Eigen::MatrixXd cross_with_knots(const Points& pts) const;

  std::unique_ptr<CorrelationKernel> parent_;
  Points knots_;
  Eigen::LLT<Eigen::MatrixXd> knot_llt_;  // Cholesky of R_uu (jittered if needed)
};

// Pairwise kernel evaluations between two point sets (rows of a, rows of b).
Eigen::MatrixXd cross_matrix(const CorrelationKernel& kernel, const Points& a, const Points& b);

// R over a nonempty point list; errors if the list is empty or, for the
// modified predictive process, if R_uu is singular beyond the jitter budget.
CorrelationMatrix build_matrix(const CorrelationKernel& kernel, const Points& pts);

}  // namespace logibeta

#endif
