#ifndef LOGIBETA_BINARY_REGRESSION_HPP
#define LOGIBETA_BINARY_REGRESSION_HPP

// Latent logistic-beta process model for binary data and its blocked
// Gibbs sampler, with the adaptive Polya proposal, particle-Gibbs and
// PMMH variants, low-rank update paths and kernel-range updates.

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include "logibeta/kernels.hpp"
#include "logibeta/logistic_beta.hpp"

namespace logibeta {

struct BinaryDataset {
  Points x;           // n x d covariates, d = 1 or 2
  Eigen::VectorXi z;  // responses in {0,1}

  int size() const { return static_cast<int>(z.size()); }
};

void validate_dataset(const BinaryDataset& data);

enum class LambdaSampler { kMetropolisHastings, kParticleGibbs };

struct AbHyperprior {
  std::function<double(double a, double b)> log_density;  // proper prior on (a,b)
  double rw_step = 0.2;  // random-walk sd on (ln a, ln b)
  int particles = 10;
};

struct BinaryRegressionConfig {
  ShapePair shape;
  // Discrete kernel grid; a single entry means fixed kernel parameters.
  std::vector<std::shared_ptr<const CorrelationKernel>> kernel_grid;
  Eigen::VectorXd kernel_grid_values;     // reported parameter per entry (e.g. Matern range)
  Eigen::VectorXd kernel_grid_log_prior;  // empty => uniform
  int kernel_start_index = 0;
  bool blocked = true;
  bool adapted = true;
  LambdaSampler lambda_sampler = LambdaSampler::kMetropolisHastings;
  int particle_count = 10;
  bool force_dense = false;  // dense collapsed-likelihood path even when R factors
  std::optional<AbHyperprior> ab_prior;
  int iterations = 2000;
  int burn_in = 1000;
  std::uint64_t seed = 1;
  int polya_truncation = kDefaultPolyaTruncation;
};

struct BinaryRegressionState {
  Eigen::VectorXd eta;
  double lambda = 1.0;
  Eigen::VectorXd omega;
  int kernel_index = 0;
  ShapePair ab;
  double lambda_bar = 1.0;  // running average driving the adaptive proposal
  long adapt_count = 0;     // m
  std::vector<double> pmmh_particles;  // retained particle set for (a,b) moves
  std::optional<Eigen::VectorXd> gamma;
};

struct ChainOutput {
  Eigen::MatrixXd eta_draws;           // retained x n
  Eigen::MatrixXd gamma_draws;         // retained x q (empty on the dense path)
  Eigen::VectorXd lambda_draws;
  Eigen::VectorXd kernel_value_draws;  // grid value per retained draw
  Eigen::MatrixXd ab_draws;            // retained x 2 (empty when (a,b) fixed)
  long lambda_accepts = 0;
  long lambda_attempts = 0;
  long ab_accepts = 0;
  long ab_attempts = 0;
  double sampler_seconds = 0.0;  // wall clock around the sampling loop only
  std::uint64_t seed = 0;
  int iterations = 0;
  int burn_in = 0;

  int retained() const { return static_cast<int>(lambda_draws.size()); }
};

// --- sampler steps --------------------------------------------------------

// Step 1: omega_i ~ PG(1, eta_i), independently.
Eigen::VectorXd step_pg(const Eigen::VectorXd& eta, Rng& rng);

// ln L(lambda) = ln N_n(Omega^{-1} kappa; 0.5 lambda (a-b) 1, lambda R + Omega^{-1})
// with kappa = z - 0.5. Evaluated in the whitened form
// I + lambda Om^{1/2} R Om^{1/2} (so Omega^{-1} is never formed), via the
// Woodbury identity and matrix determinant lemma when R carries a low-rank
// factor, dense Cholesky otherwise.
double collapsed_lambda_log_likelihood(double lambda, const Eigen::VectorXd& omega,
                                       const BinaryDataset& data, const CorrelationMatrix& R,
                                       const ShapePair& shape, bool force_dense = false);

// Raw-piece versions reused by the mixture sampler and the dual-route tests.
double collapsed_loglik_dense(double lambda, const Eigen::VectorXd& omega,
                              const Eigen::VectorXd& kappa, double mean_scale,
                              const Eigen::MatrixXd& r_dense);
double collapsed_loglik_lowrank(double lambda, const Eigen::VectorXd& omega,
                                const Eigen::VectorXd& kappa, double mean_scale,
                                const Eigen::MatrixXd& w, const Eigen::VectorXd& diag_rem);

// Moment-matched proposal pair (a', b') with a' + b' = a + b and a' <= b';
// a' = c/2 when lambda_bar <= 2 psi'(c/2), else the bisection root of
// h(a') = 2{psi(a') - psi(c-a')}/(2a' - c) = lambda_bar.
ShapePair adaptive_proposal(const ShapePair& shape, double lambda_bar);

struct LambdaMove {
  double lambda = 0.0;
  double log_likelihood = 0.0;
  bool accepted = false;
};

// ln alpha_MH = (lambda - cand)(ab - a'b')/2 + ln L(cand) - ln L(lambda).
double lambda_mh_log_acceptance(double lambda, double cand, const ShapePair& shape,
                                const ShapePair& proposal_shape, double cand_loglik,
                                double current_loglik);

// Independent MH with proposal Polya(a',b'); the acceptance ratio
// exp{(lambda - lambda*)(ab - a'b')/2} L(lambda*)/L(lambda) needs no Polya
// density evaluation.
LambdaMove step_lambda_mh(double lambda, double current_loglik, const ShapePair& shape,
                          const ShapePair& proposal_shape,
                          const std::function<double(double)>& loglik, int polya_truncation,
                          Rng& rng);

// Particle Gibbs: N fresh candidates plus the current value, selected with
// weights w_k = exp{-lambda_k (ab - a'b')/2} L(lambda_k). "accepted" means
// one of the N new candidates was selected.
LambdaMove step_lambda_particle_gibbs(double lambda, double current_loglik,
                                      const ShapePair& shape, const ShapePair& proposal_shape,
                                      const std::function<double(double)>& loglik, int n_particles,
                                      int polya_truncation, Rng& rng);

// Step 3, full-rank path: eta | omega, lambda, z ~
// N[(Om + (lambda R)^{-1})^{-1}{kappa + 0.5(a-b) R^{-1} 1}, (Om + (lambda R)^{-1})^{-1}],
// drawn via Cholesky of the precision.
Eigen::VectorXd step_eta_dense(double lambda, const Eigen::VectorXd& omega,
                               const Eigen::VectorXd& kappa, const ShapePair& shape,
                               const Eigen::MatrixXd& r_inv, const Eigen::VectorXd& r_inv_one,
                               Rng& rng);

// Conditional moments of the coefficient vector on the low-rank path:
// V = (I_q + lambda Phi^T Om Phi)^{-1},
// mean = V sqrt(lambda) Phi^T {kappa - 0.5 lambda (a-b) omega}.
struct GammaConditional {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;
};
GammaConditional gamma_conditional(double lambda, const Eigen::VectorXd& omega,
                                   const Eigen::VectorXd& kappa, const ShapePair& shape,
                                   const Eigen::MatrixXd& phi);

struct LowRankEtaDraw {
  Eigen::VectorXd eta;  // at the rows of phi_out
  Eigen::VectorXd gamma;
};

// Step 3, low-rank path: draw gamma from its conditional given the data
// rows phi_data, then set eta = 0.5 lambda (a-b) 1 + sqrt(lambda) phi_out gamma.
LowRankEtaDraw step_eta_lowrank(double lambda, const Eigen::VectorXd& omega,
                                const Eigen::VectorXd& kappa, const ShapePair& shape,
                                const Eigen::MatrixXd& phi_data, const Eigen::MatrixXd& phi_out,
                                Rng& rng);

// Per-kernel caches shared by the sampler steps.
struct KernelWorkspace {
  CorrelationMatrix R;
  std::optional<Eigen::MatrixXd> r_inv;  // dense path only
  Eigen::VectorXd r_inv_one;
  double log_det_r = 0.0;
  bool dense_ready = false;

  static KernelWorkspace build(const CorrelationKernel& kernel, const Points& pts,
                               bool need_dense);
};

// Discrete draw of the kernel-grid index from
// prior(k) * N_n(eta; 0.5 lambda (a-b) 1, lambda R_k), in log space.
int step_kernel_params(const Eigen::VectorXd& eta, double lambda, const ShapePair& shape,
                       const std::vector<KernelWorkspace>& grid,
                       const Eigen::VectorXd& log_prior, Rng& rng);

// ln N_n(eta; 0.5 lambda (a-b) 1, lambda R) from a dense-ready workspace.
double eta_prior_log_density(const Eigen::VectorXd& eta, double lambda, const ShapePair& shape,
                             const KernelWorkspace& ws);

// Joint (a,b,lambda) particle marginal MH move; the retained particle set
// lives in the state and is re-weighted under the current omega. Returns
// true when the proposal was accepted.
bool step_ab_pmmh(BinaryRegressionState& state, const AbHyperprior& prior,
                  const std::function<double(double lambda, const ShapePair& ab)>& loglik,
                  int polya_truncation, Rng& rng);

// Full chain: Step 1 -> Step 2 (collapsed, or the eta-conditioned full
// conditional in non-blocked mode) -> Step 3, plus the optional kernel-grid
// and (a,b) moves. Deterministic given config.seed.
ChainOutput run_chain(const BinaryRegressionConfig& config, const BinaryDataset& data);

// --- prediction ------------------------------------------------------------

struct PredictionSummary {
  Eigen::VectorXd mean;   // posterior mean of sigma(eta(x*))
  Eigen::VectorXd lower;  // 2.5% quantile
  Eigen::VectorXd upper;  // 97.5% quantile
};

// Per retained draw, eta(x*) is drawn from its Gaussian conditional given
// (eta, lambda) and pushed through the logistic; summaries are pointwise.
PredictionSummary predict_probabilities(const ChainOutput& chain,
                                        const BinaryRegressionConfig& config,
                                        const BinaryDataset& train, const Points& new_points,
                                        int thin = 1);

}  // namespace logibeta

#endif
