#ifndef LOGIBETA_DDP_MIXTURE_HPP
#define LOGIBETA_DDP_MIXTURE_HPP

// Logistic-beta dependent Dirichlet process mixture (and its Pitman-Yor
// generalization): truncated stick-breaking prior, blocked Gibbs sampler,
// and posterior conditional density / cdf summaries.

#include <Eigen/Dense>
#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

#include "logibeta/binary_regression.hpp"

namespace logibeta {

struct StickBreakingSpec {
  int truncation = 20;        // H >= 2; sigma(eta_H) == 1 (no latent field at level H)
  double concentration = 1.0; // b
  double discount = 0.0;      // Pitman-Yor discount; 0 reduces to the LB-DDP
  std::shared_ptr<const CorrelationKernel> kernel;

  // Shapes of level h = level+1 (level is 0-based): (1 - d, b + h d).
  ShapePair level_shape(int level) const;
};

void validate_spec(const StickBreakingSpec& spec);

struct AtomPrior {
  Eigen::Matrix2d sigma_beta = Eigen::Matrix2d::Identity();
  double a_tau = 1.0;
  double b_tau = 1.0;
};

struct AtomParams {
  Eigen::VectorXd beta0;  // length H
  Eigen::VectorXd beta1;
  Eigen::VectorXd tau;
};

struct RegressionDataset {
  Eigen::VectorXd x;
  Eigen::VectorXd y;

  int size() const { return static_cast<int>(y.size()); }
};

void validate_dataset(const RegressionDataset& data);

struct MixtureState {
  Eigen::VectorXi s;                    // allocations in 1..H
  Eigen::MatrixXd eta;                  // n x (H-1), level fields at every point
  Eigen::VectorXd lambda;               // H-1
  std::vector<Eigen::VectorXd> gamma;   // per level; empty vectors on the dense path
  AtomParams atoms;
  Eigen::VectorXd lambda_bar;           // per-level adaptation averages
  std::vector<long> adapt_count;
};

// Truncated stick weights from the H-1 level fields at one point:
// w_h = sigma(eta_h) prod_{l<h} {1 - sigma(eta_l)}, last stick forced to 1.
Eigen::VectorXd stick_weights(const Eigen::VectorXd& eta_levels);

struct PriorDdpDraw {
  Eigen::MatrixXd weights;  // n x H
  AtomParams atoms;
  std::vector<LBPRealization> levels;
};

// H-1 independent LBP realizations plus i.i.d. atoms from the base priors.
PriorDdpDraw sample_prior_lbddp(const StickBreakingSpec& spec, const Points& points,
                                const AtomPrior& atom_prior, Rng& rng,
                                int polya_truncation = kDefaultPolyaTruncation);

// Shared per-dataset caches for the sampler steps.
struct MixtureWorkspace {
  StickBreakingSpec spec;
  AtomPrior atom_prior;
  int polya_truncation = kDefaultPolyaTruncation;
  std::optional<Eigen::MatrixXd> phi;      // feature rows (exact-factor kernels)
  std::optional<Eigen::MatrixXd> r_dense;  // dense R otherwise
  std::optional<Eigen::LLT<Eigen::MatrixXd>> r_llt;

  bool low_rank() const { return phi.has_value(); }

  static MixtureWorkspace build(const StickBreakingSpec& spec, const AtomPrior& atom_prior,
                                const Eigen::VectorXd& x,
                                int polya_truncation = kDefaultPolyaTruncation);
};

// I_h = {i : s_i > h - 1} with h = level + 1 (allocations are 1-based).
std::vector<int> level_active_set(const Eigen::VectorXi& s, int level);

// Z_h = {1(s_i = h) : i in I_h}.
Eigen::VectorXd level_binary_responses(const Eigen::VectorXi& s, int level,
                                       const std::vector<int>& active);

// Step 1: allocations from pr(s_i = h) ~ w_h(x_i) N(y_i; b0h + b1h x_i, 1/tau_h).
void alg2_step_allocations(MixtureState& state, const RegressionDataset& data, Rng& rng);

// Step 2: one blocked binary-regression Gibbs cycle per level on the nested
// binary data Z_h = {1(s_i = h) : s_i > h-1}; empty levels are prior draws.
// Counters accumulate lambda MH accepts/attempts.
void alg2_step_weights(MixtureState& state, const RegressionDataset& data,
                       const MixtureWorkspace& ws, Rng& rng, long* accepts = nullptr,
                       long* attempts = nullptr);

// Step 3: conjugate draws of (beta_0h, beta_1h) and tau_h per component.
void alg2_step_atoms(MixtureState& state, const RegressionDataset& data, const AtomPrior& prior,
                     Rng& rng);

// Prior-initialized state (allocations drawn from the prior weights).
MixtureState init_mixture_state(const RegressionDataset& data, const MixtureWorkspace& ws,
                                Rng& rng);

struct MixtureChainOutput {
  Eigen::MatrixXd lambda_draws;              // retained x (H-1)
  std::vector<Eigen::MatrixXd> gamma_draws;  // each q x (H-1), factor kernels
  std::vector<Eigen::MatrixXd> eta_draws;    // each n x (H-1), dense kernels
  Eigen::MatrixXd beta0_draws;               // retained x H
  Eigen::MatrixXd beta1_draws;
  Eigen::MatrixXd tau_draws;
  Eigen::MatrixXi occupancy;                 // retained x H component counts
  bool saturated = false;  // all H components occupied at some iteration
  long lambda_accepts = 0;
  long lambda_attempts = 0;
  double sampler_seconds = 0.0;
  std::uint64_t seed = 0;
  int iterations = 0;
  int burn_in = 0;
  Eigen::VectorXd train_x;

  int retained() const { return static_cast<int>(lambda_draws.rows()); }
};

// Blocked Gibbs: Step 1 -> Step 2 -> Step 3 per cycle, deterministic given
// the seed (per-level streams are derived from (seed, iteration, level)).
MixtureChainOutput run_mixture_chain(const StickBreakingSpec& spec, const AtomPrior& atom_prior,
                                     const RegressionDataset& data, int iterations, int burn_in,
                                     std::uint64_t seed,
                                     int polya_truncation = kDefaultPolyaTruncation);

struct DensitySummary {
  Eigen::VectorXd mean;   // posterior mean density over y_grid
  Eigen::VectorXd lower;  // 2.5% band (empty unless requested)
  Eigen::VectorXd upper;
};

// Posterior of the mixture density f(y | x) on a y grid.
DensitySummary conditional_density(const MixtureChainOutput& chain, const StickBreakingSpec& spec,
                                   double x, const Eigen::VectorXd& y_grid, int thin = 1,
                                   bool want_bands = false);

struct CdfSummary {
  double mean = 0.0;
  double lower = 0.0;
  double upper = 0.0;
};

// Posterior of P(y <= threshold | x).
CdfSummary conditional_cdf(const MixtureChainOutput& chain, const StickBreakingSpec& spec,
                           double x, double threshold, int thin = 1);

// Posterior mean of E(y | x).
double conditional_mean(const MixtureChainOutput& chain, const StickBreakingSpec& spec, double x,
                        int thin = 1);

}  // namespace logibeta

#endif
