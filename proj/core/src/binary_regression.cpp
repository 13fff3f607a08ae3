#include "logibeta/binary_regression.hpp"

#include <chrono>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "logibeta/linalg.hpp"
#include "logibeta/special_math.hpp"

namespace logibeta {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;

Eigen::VectorXd kappa_of(const BinaryDataset& data) {
  return data.z.cast<double>().array() - 0.5;
}

int sample_categorical_log(const Eigen::VectorXd& log_weights, Rng& rng) {
  const double norm = log_sum_exp({log_weights.data(), static_cast<size_t>(log_weights.size())});
  double u = runif(rng);
  double cum = 0.0;
  for (int k = 0; k < log_weights.size(); ++k) {
    cum += std::exp(log_weights(k) - norm);
    if (u <= cum) return k;
  }
  return static_cast<int>(log_weights.size()) - 1;
}

}  // namespace

void validate_dataset(const BinaryDataset& data) {
  if (data.z.size() < 1) throw std::invalid_argument("BinaryDataset: empty");
  if (data.x.rows() != data.z.size()) {
    throw std::invalid_argument("BinaryDataset: covariate/response size mismatch");
  }
  for (int i = 0; i < data.z.size(); ++i) {
    if (data.z(i) != 0 && data.z(i) != 1) {
      throw std::invalid_argument("BinaryDataset: responses must be 0/1");
    }
  }
}

Eigen::VectorXd step_pg(const Eigen::VectorXd& eta, Rng& rng) {
  Eigen::VectorXd omega(eta.size());
  for (int i = 0; i < eta.size(); ++i) omega(i) = sample_polya_gamma_1(eta(i), rng);
  return omega;
}

// ---------------------------------------------------------------------------
// Collapsed likelihood L(lambda), whitened as
//   ln L = -0.5 [ n ln 2pi - sum ln omega_i + ln det M + u^T M^{-1} u ],
//   M = I + lambda Om^{1/2} R Om^{1/2},
//   u_i = kappa_i/sqrt(omega_i) - lambda * ms * sqrt(omega_i),  ms = (a-b)/2.
// ---------------------------------------------------------------------------

double collapsed_loglik_dense(double lambda, const Eigen::VectorXd& omega,
                              const Eigen::VectorXd& kappa, double mean_scale,
                              const Eigen::MatrixXd& r_dense) {
  const int n = static_cast<int>(omega.size());
  const Eigen::ArrayXd sq = omega.array().sqrt();
  Eigen::MatrixXd m = lambda * (sq.matrix() * sq.matrix().transpose()).cwiseProduct(r_dense);
  m.diagonal().array() += 1.0;
  const auto llt = chol_with_jitter(std::move(m));
  const Eigen::VectorXd u = (kappa.array() / sq - lambda * mean_scale * sq).matrix();
  const Eigen::VectorXd w = llt.matrixL().solve(u);
  return -0.5 * (n * kLog2Pi - omega.array().log().sum() + log_det_from_chol(llt) +
                 w.squaredNorm());
}

double collapsed_loglik_lowrank(double lambda, const Eigen::VectorXd& omega,
                                const Eigen::VectorXd& kappa, double mean_scale,
                                const Eigen::MatrixXd& w, const Eigen::VectorXd& diag_rem) {
  const int n = static_cast<int>(omega.size());
  const Eigen::ArrayXd sq = omega.array().sqrt();
  // M = Dt + U U^T, Dt_i = 1 + lambda omega_i d_i, U = sqrt(lambda) Om^{1/2} W
  const Eigen::ArrayXd dt = 1.0 + lambda * omega.array() * diag_rem.array();
  const Eigen::MatrixXd u_mat = std::sqrt(lambda) * sq.matrix().asDiagonal() * w;
  const Eigen::VectorXd u = (kappa.array() / sq - lambda * mean_scale * sq).matrix();

  Eigen::MatrixXd small = u_mat.transpose() * (u_mat.array().colwise() / dt).matrix();
  small.diagonal().array() += 1.0;
  const auto small_llt = chol_with_jitter(std::move(small));

  const double log_det = dt.log().sum() + log_det_from_chol(small_llt);
  const Eigen::VectorXd du = (u.array() / dt).matrix();
  const Eigen::VectorXd v = u_mat.transpose() * du;
  const double quad = u.dot(du) - v.dot(small_llt.solve(v));
  return -0.5 * (n * kLog2Pi - omega.array().log().sum() + log_det + quad);
}

double collapsed_lambda_log_likelihood(double lambda, const Eigen::VectorXd& omega,
                                       const BinaryDataset& data, const CorrelationMatrix& R,
                                       const ShapePair& shape, bool force_dense) {
  if (!(lambda > 0.0)) throw std::invalid_argument("collapsed likelihood: lambda must be > 0");
  const Eigen::VectorXd kappa = kappa_of(data);
  const double ms = 0.5 * (shape.a - shape.b);
  if (R.has_low_rank() && !force_dense) {
    return collapsed_loglik_lowrank(lambda, omega, kappa, ms, *R.factor, *R.diag_rem);
  }
  return collapsed_loglik_dense(lambda, omega, kappa, ms, R.dense);
}

// ---------------------------------------------------------------------------
// Adaptive Polya proposal
// ---------------------------------------------------------------------------

namespace {

// Mean of Polya(a', c - a') as a function of a' on (0, c/2]; decreasing,
// with limit 2 psi'(c/2) at the symmetric point.
double proposal_mean(double a_prime, double c) {
  const double denom = 2.0 * a_prime - c;
  if (std::abs(denom) < 1e-12 * c) return 2.0 * trigamma(0.5 * c);
  return 2.0 * (digamma(a_prime) - digamma(c - a_prime)) / denom;
}

}  // namespace

ShapePair adaptive_proposal(const ShapePair& shape, double lambda_bar) {
  validate_shape(shape);
  if (!(lambda_bar > 0.0)) throw std::invalid_argument("adaptive_proposal: lambda_bar must be > 0");
  const double c = shape.a + shape.b;
  if (lambda_bar <= 2.0 * trigamma(0.5 * c)) return {0.5 * c, 0.5 * c};
  double lo = 1e-8, hi = 0.5 * c;
  // h(lo) -> +inf and h(hi) < lambda_bar, so the bracket always holds
  while (hi - lo > 1e-10) {
    const double mid = 0.5 * (lo + hi);
    if (proposal_mean(mid, c) > lambda_bar) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  const double a_prime = 0.5 * (lo + hi);
  return {a_prime, c - a_prime};
}

double lambda_mh_log_acceptance(double lambda, double cand, const ShapePair& shape,
                                const ShapePair& proposal_shape, double cand_loglik,
                                double current_loglik) {
  const double tilt = shape.a * shape.b - proposal_shape.a * proposal_shape.b;
  return 0.5 * (lambda - cand) * tilt + cand_loglik - current_loglik;
}

LambdaMove step_lambda_mh(double lambda, double current_loglik, const ShapePair& shape,
                          const ShapePair& proposal_shape,
                          const std::function<double(double)>& loglik, int polya_truncation,
                          Rng& rng) {
  const double cand = sample_polya(proposal_shape, polya_truncation, rng).lambda;
  const double cand_loglik = loglik(cand);
  const double log_alpha =
      lambda_mh_log_acceptance(lambda, cand, shape, proposal_shape, cand_loglik, current_loglik);
  if (std::log(runif(rng)) < log_alpha) return {cand, cand_loglik, true};
  return {lambda, current_loglik, false};
}

LambdaMove step_lambda_particle_gibbs(double lambda, double current_loglik,
                                      const ShapePair& shape, const ShapePair& proposal_shape,
                                      const std::function<double(double)>& loglik, int n_particles,
                                      int polya_truncation, Rng& rng) {
  if (n_particles < 1) throw std::invalid_argument("particle gibbs: need N >= 1");
  const double tilt = shape.a * shape.b - proposal_shape.a * proposal_shape.b;
  Eigen::VectorXd cand(n_particles + 1);
  Eigen::VectorXd cand_ll(n_particles + 1);
  Eigen::VectorXd log_w(n_particles + 1);
  for (int k = 0; k < n_particles; ++k) {
    cand(k) = sample_polya(proposal_shape, polya_truncation, rng).lambda;
    cand_ll(k) = loglik(cand(k));
    log_w(k) = -0.5 * cand(k) * tilt + cand_ll(k);
  }
  cand(n_particles) = lambda;
  cand_ll(n_particles) = current_loglik;
  log_w(n_particles) = -0.5 * lambda * tilt + current_loglik;
  const int pick = sample_categorical_log(log_w, rng);
  return {cand(pick), cand_ll(pick), pick < n_particles};
}

// ---------------------------------------------------------------------------
// Step 3
// ---------------------------------------------------------------------------

Eigen::VectorXd step_eta_dense(double lambda, const Eigen::VectorXd& omega,
                               const Eigen::VectorXd& kappa, const ShapePair& shape,
                               const Eigen::MatrixXd& r_inv, const Eigen::VectorXd& r_inv_one,
                               Rng& rng) {
  Eigen::MatrixXd prec = r_inv / lambda;
  prec.diagonal() += omega;
  const auto llt = chol_with_jitter(std::move(prec));
  const Eigen::VectorXd rhs = kappa + 0.5 * (shape.a - shape.b) * r_inv_one;
  const Eigen::VectorXd mean = llt.solve(rhs);
  return sample_mvn_prec_chol(mean, llt, rng);
}

GammaConditional gamma_conditional(double lambda, const Eigen::VectorXd& omega,
                                   const Eigen::VectorXd& kappa, const ShapePair& shape,
                                   const Eigen::MatrixXd& phi) {
  const int q = static_cast<int>(phi.cols());
  Eigen::MatrixXd prec = lambda * phi.transpose() * omega.asDiagonal() * phi;
  prec.diagonal().array() += 1.0;
  const auto llt = chol_with_jitter(std::move(prec));
  const Eigen::VectorXd resid = kappa - 0.5 * lambda * (shape.a - shape.b) * omega;
  GammaConditional out;
  out.mean = llt.solve(std::sqrt(lambda) * phi.transpose() * resid);
  out.cov = llt.solve(Eigen::MatrixXd::Identity(q, q));
  return out;
}

LowRankEtaDraw step_eta_lowrank(double lambda, const Eigen::VectorXd& omega,
                                const Eigen::VectorXd& kappa, const ShapePair& shape,
                                const Eigen::MatrixXd& phi_data, const Eigen::MatrixXd& phi_out,
                                Rng& rng) {
  Eigen::MatrixXd prec = lambda * phi_data.transpose() * omega.asDiagonal() * phi_data;
  prec.diagonal().array() += 1.0;
  const auto llt = chol_with_jitter(std::move(prec));
  const Eigen::VectorXd resid = kappa - 0.5 * lambda * (shape.a - shape.b) * omega;
  const Eigen::VectorXd mean = llt.solve(std::sqrt(lambda) * phi_data.transpose() * resid);
  LowRankEtaDraw out;
  out.gamma = sample_mvn_prec_chol(mean, llt, rng);
  out.eta = (0.5 * lambda * (shape.a - shape.b) +
             std::sqrt(lambda) * (phi_out * out.gamma).array())
                .matrix();
  return out;
}

// ---------------------------------------------------------------------------
// Kernel workspaces and the range-grid move
// ---------------------------------------------------------------------------

KernelWorkspace KernelWorkspace::build(const CorrelationKernel& kernel, const Points& pts,
                                       bool need_dense) {
  KernelWorkspace ws;
  ws.R = build_matrix(kernel, pts);
  if (need_dense) {
    if (ws.R.factor_is_exact()) {
      throw std::invalid_argument(
          "full-rank path requested for an exactly low-rank kernel; use the factor path");
    }
    const auto llt = chol_with_jitter(ws.R.dense);
    const int n = ws.R.size();
    ws.r_inv = llt.solve(Eigen::MatrixXd::Identity(n, n));
    ws.r_inv_one = llt.solve(Eigen::VectorXd::Ones(n));
    ws.log_det_r = log_det_from_chol(llt);
    ws.dense_ready = true;
  }
  return ws;
}

double eta_prior_log_density(const Eigen::VectorXd& eta, double lambda, const ShapePair& shape,
                             const KernelWorkspace& ws) {
  if (!ws.dense_ready) throw std::logic_error("eta_prior_log_density: dense caches missing");
  const int n = static_cast<int>(eta.size());
  const Eigen::VectorXd v = eta.array() - 0.5 * lambda * (shape.a - shape.b);
  const double quad = v.dot(*ws.r_inv * v);
  return -0.5 * (n * (kLog2Pi + std::log(lambda)) + ws.log_det_r + quad / lambda);
}

int step_kernel_params(const Eigen::VectorXd& eta, double lambda, const ShapePair& shape,
                       const std::vector<KernelWorkspace>& grid,
                       const Eigen::VectorXd& log_prior, Rng& rng) {
  if (grid.empty()) throw std::invalid_argument("step_kernel_params: empty grid");
  if (grid.size() == 1) return 0;
  Eigen::VectorXd lw(static_cast<int>(grid.size()));
  for (int k = 0; k < lw.size(); ++k) {
    const double lp = log_prior.size() > 0 ? log_prior(k) : 0.0;
    lw(k) = lp + eta_prior_log_density(eta, lambda, shape, grid[k]);
  }
  return sample_categorical_log(lw, rng);
}

// ---------------------------------------------------------------------------
// PMMH for (a, b)
// ---------------------------------------------------------------------------

bool step_ab_pmmh(BinaryRegressionState& state, const AbHyperprior& prior,
                  const std::function<double(double lambda, const ShapePair& ab)>& loglik,
                  int polya_truncation, Rng& rng) {
  const int n_particles = prior.particles;
  const ShapePair ab = state.ab;
  const ShapePair cand{std::exp(std::log(ab.a) + prior.rw_step * rnorm(rng)),
                       std::exp(std::log(ab.b) + prior.rw_step * rnorm(rng))};

  const double lp_cand = prior.log_density(cand.a, cand.b);
  const double lp_cur = prior.log_density(ab.a, ab.b);
  if (!std::isfinite(lp_cand)) return false;  // zero prior mass: always rejected

  Eigen::VectorXd cand_particles(n_particles), cand_ll(n_particles);
  for (int l = 0; l < n_particles; ++l) {
    cand_particles(l) = sample_polya(cand, polya_truncation, rng).lambda;
    cand_ll(l) = loglik(cand_particles(l), cand);
  }
  Eigen::VectorXd cur_ll(n_particles);
  for (int l = 0; l < n_particles; ++l) {
    cur_ll(l) = loglik(state.pmmh_particles[l], ab);
  }
  const double log_sum_cand = log_sum_exp({cand_ll.data(), static_cast<size_t>(n_particles)});
  const double log_sum_cur = log_sum_exp({cur_ll.data(), static_cast<size_t>(n_particles)});

  // select the carried candidate before the accept decision
  const int pick = sample_categorical_log(cand_ll, rng);

  // symmetric walk on logs => Jacobian factor a* b* / (a b)
  const double log_alpha = lp_cand - lp_cur + log_sum_cand - log_sum_cur +
                           std::log(cand.a * cand.b / (ab.a * ab.b));
  if (std::log(runif(rng)) < log_alpha) {
    state.ab = cand;
    state.lambda = cand_particles(pick);
    state.pmmh_particles.assign(cand_particles.data(), cand_particles.data() + n_particles);
    return true;
  }
  return false;
}

// ---------------------------------------------------------------------------
// Full chain
// ---------------------------------------------------------------------------

namespace {

void validate_config(const BinaryRegressionConfig& config, const BinaryDataset& data) {
  validate_dataset(data);
  validate_shape(config.shape);
  if (config.kernel_grid.empty()) throw std::invalid_argument("config: empty kernel grid");
  if (config.kernel_grid_values.size() != static_cast<int>(config.kernel_grid.size())) {
    throw std::invalid_argument("config: kernel grid values/entries mismatch");
  }
  if (config.kernel_grid_log_prior.size() != 0 &&
      config.kernel_grid_log_prior.size() != static_cast<int>(config.kernel_grid.size())) {
    throw std::invalid_argument("config: kernel grid prior length mismatch");
  }
  if (config.iterations <= config.burn_in || config.burn_in < 0) {
    throw std::invalid_argument("config: need iterations > burn_in >= 0");
  }
  if (config.particle_count < 1) throw std::invalid_argument("config: particle count must be >= 1");
  if (config.kernel_start_index < 0 ||
      config.kernel_start_index >= static_cast<int>(config.kernel_grid.size())) {
    throw std::invalid_argument("config: kernel start index out of range");
  }
  if (config.ab_prior && !config.blocked) {
    throw std::invalid_argument("config: the (a,b) PMMH move requires the blocked sampler");
  }
}

}  // namespace

ChainOutput run_chain(const BinaryRegressionConfig& config, const BinaryDataset& data) {
  validate_config(config, data);
  Rng rng(config.seed);
  const int n = data.size();
  const Eigen::VectorXd kappa = kappa_of(data);

  const bool single_exact_factor =
      config.kernel_grid.size() == 1 &&
      config.kernel_grid[0]->matrix(data.x).factor_is_exact() && !config.force_dense;
  const bool need_dense = !single_exact_factor;

  std::vector<KernelWorkspace> grid;
  grid.reserve(config.kernel_grid.size());
  for (const auto& kernel : config.kernel_grid) {
    grid.push_back(KernelWorkspace::build(*kernel, data.x, need_dense));
  }
  if (!config.blocked && !grid[config.kernel_start_index].dense_ready) {
    throw std::invalid_argument("config: non-blocked sampling needs a full-rank kernel");
  }

  BinaryRegressionState state;
  state.kernel_index = config.kernel_start_index;
  state.ab = config.shape;
  state.lambda = sample_polya(state.ab, config.polya_truncation, rng).lambda;
  {
    const KernelWorkspace& ws = grid[state.kernel_index];
    const double m = 0.5 * state.lambda * (state.ab.a - state.ab.b);
    if (ws.R.factor_is_exact() && !config.force_dense) {
      Eigen::VectorXd gam = standard_normal_vector(static_cast<int>(ws.R.factor->cols()), rng);
      state.eta = (m + std::sqrt(state.lambda) * (*ws.R.factor * gam).array()).matrix();
      state.gamma = std::move(gam);
    } else {
      const auto llt = chol_with_jitter(ws.R.dense);
      const Eigen::VectorXd noise = llt.matrixL() * standard_normal_vector(n, rng);
      state.eta = Eigen::VectorXd::Constant(n, m) + std::sqrt(state.lambda) * noise;
    }
  }
  state.lambda_bar = state.lambda;
  state.adapt_count = 1;
  if (config.ab_prior) {
    state.pmmh_particles.resize(config.ab_prior->particles);
    for (double& p : state.pmmh_particles) {
      p = sample_polya(state.ab, config.polya_truncation, rng).lambda;
    }
  }

  const int retained = config.iterations - config.burn_in;
  ChainOutput out;
  out.eta_draws.resize(retained, n);
  out.lambda_draws.resize(retained);
  out.kernel_value_draws.resize(retained);
  if (single_exact_factor) {
    out.gamma_draws.resize(retained, grid[0].R.factor->cols());
  }
  if (config.ab_prior) out.ab_draws.resize(retained, 2);
  out.seed = config.seed;
  out.iterations = config.iterations;
  out.burn_in = config.burn_in;

  const auto t0 = std::chrono::steady_clock::now();
  for (int iter = 0; iter < config.iterations; ++iter) {
    const KernelWorkspace& ws = grid[state.kernel_index];

    // [1] Polya-Gamma refresh
    state.omega = step_pg(state.eta, rng);

    // [2] lambda (and optionally (a,b)) from the collapsed or full conditional
    if (config.ab_prior) {
      auto ll = [&](double lambda, const ShapePair& ab) {
        const double ms = 0.5 * (ab.a - ab.b);
        return ws.R.has_low_rank() && !config.force_dense
                   ? collapsed_loglik_lowrank(lambda, state.omega, kappa, ms, *ws.R.factor,
                                              *ws.R.diag_rem)
                   : collapsed_loglik_dense(lambda, state.omega, kappa, ms, ws.R.dense);
      };
      out.ab_attempts += 1;
      if (step_ab_pmmh(state, *config.ab_prior, ll, config.polya_truncation, rng)) {
        out.ab_accepts += 1;
      }
    } else {
      std::function<double(double)> ll;
      if (config.blocked) {
        ll = [&](double lambda) {
          return collapsed_lambda_log_likelihood(lambda, state.omega, data, ws.R, state.ab,
                                                 config.force_dense);
        };
      } else {
        ll = [&](double lambda) {
          return eta_prior_log_density(state.eta, lambda, state.ab, ws);
        };
      }
      const double cur_ll = ll(state.lambda);
      const ShapePair proposal =
          config.adapted ? adaptive_proposal(state.ab, state.lambda_bar) : state.ab;
      LambdaMove move =
          config.lambda_sampler == LambdaSampler::kParticleGibbs
              ? step_lambda_particle_gibbs(state.lambda, cur_ll, state.ab, proposal, ll,
                                           config.particle_count, config.polya_truncation, rng)
              : step_lambda_mh(state.lambda, cur_ll, state.ab, proposal, ll,
                               config.polya_truncation, rng);
      state.lambda = move.lambda;
      out.lambda_attempts += 1;
      if (move.accepted) out.lambda_accepts += 1;
    }
    state.adapt_count += 1;
    state.lambda_bar += (state.lambda - state.lambda_bar) / state.adapt_count;

    // [3] eta
    if (single_exact_factor) {
      LowRankEtaDraw draw = step_eta_lowrank(state.lambda, state.omega, kappa, state.ab,
                                             *grid[0].R.factor, *grid[0].R.factor, rng);
      state.eta = std::move(draw.eta);
      state.gamma = std::move(draw.gamma);
    } else {
      state.eta = step_eta_dense(state.lambda, state.omega, kappa, state.ab, *ws.r_inv,
                                 ws.r_inv_one, rng);
    }

    // kernel-range move from its discrete full conditional
    if (grid.size() > 1) {
      state.kernel_index = step_kernel_params(state.eta, state.lambda, state.ab, grid,
                                              config.kernel_grid_log_prior, rng);
    }

    if (iter >= config.burn_in) {
      const int r = iter - config.burn_in;
      out.eta_draws.row(r) = state.eta.transpose();
      out.lambda_draws(r) = state.lambda;
      out.kernel_value_draws(r) = config.kernel_grid_values(state.kernel_index);
      if (single_exact_factor) out.gamma_draws.row(r) = state.gamma->transpose();
      if (config.ab_prior) out.ab_draws.row(r) << state.ab.a, state.ab.b;
    }
  }
  out.sampler_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

// ---------------------------------------------------------------------------
// Posterior prediction
// ---------------------------------------------------------------------------

namespace {

double quantile_of_sorted(const std::vector<double>& sorted, double p) {
  const auto n = sorted.size();
  if (n == 1) return sorted[0];
  const double pos = p * static_cast<double>(n - 1);
  const auto lo = static_cast<std::size_t>(pos);
  const auto hi = std::min(lo + 1, n - 1);
  const double w = pos - static_cast<double>(lo);
  return (1.0 - w) * sorted[lo] + w * sorted[hi];
}

}  // namespace

PredictionSummary predict_probabilities(const ChainOutput& chain,
                                        const BinaryRegressionConfig& config,
                                        const BinaryDataset& train, const Points& new_points,
                                        int thin) {
  if (chain.retained() < 1) throw std::invalid_argument("predict: empty chain");
  if (thin < 1) thin = 1;
  const int n_new = static_cast<int>(new_points.rows());
  Rng rng(mix_seed(chain.seed ^ 0x9e3779b97f4a7c15ULL));

  std::vector<int> keep;
  for (int r = 0; r < chain.retained(); r += thin) keep.push_back(r);
  const int m = static_cast<int>(keep.size());
  Eigen::MatrixXd probs(m, n_new);

  const bool low_rank = chain.gamma_draws.size() > 0;
  if (low_rank) {
    const auto phi_new = config.kernel_grid[0]->feature_rows(new_points);
    if (!phi_new) throw std::invalid_argument("predict: kernel has no feature rows");
    for (int t = 0; t < m; ++t) {
      const int r = keep[t];
      const double lambda = chain.lambda_draws(r);
      const ShapePair ab = chain.ab_draws.size() > 0
                               ? ShapePair{chain.ab_draws(r, 0), chain.ab_draws(r, 1)}
                               : config.shape;
      const Eigen::VectorXd eta_new =
          (0.5 * lambda * (ab.a - ab.b) +
           std::sqrt(lambda) * (*phi_new * chain.gamma_draws.row(r).transpose()).array())
              .matrix();
      for (int j = 0; j < n_new; ++j) probs(t, j) = logistic(eta_new(j));
    }
  } else {
    // group draws by kernel grid index so the train-side solves are reused
    std::vector<int> kernel_index_of_draw(chain.retained(), 0);
    if (config.kernel_grid.size() > 1) {
      for (int r = 0; r < chain.retained(); ++r) {
        int best = 0;
        for (int k = 1; k < config.kernel_grid_values.size(); ++k) {
          if (std::abs(config.kernel_grid_values(k) - chain.kernel_value_draws(r)) <
              std::abs(config.kernel_grid_values(best) - chain.kernel_value_draws(r))) {
            best = k;
          }
        }
        kernel_index_of_draw[r] = best;
      }
    }
    struct CondPieces {
      Eigen::MatrixXd solve_t;  // R^{-1} R_*^T (n x n*)
      Eigen::MatrixXd chol_l;   // Cholesky factor of R_** - R_* R^{-1} R_*^T
      bool ready = false;
    };
    std::vector<CondPieces> pieces(config.kernel_grid.size());
    auto prepare = [&](int k) {
      if (pieces[k].ready) return;
      const CorrelationKernel& kernel = *config.kernel_grid[k];
      const Eigen::MatrixXd r_tt = build_matrix(kernel, train.x).dense;
      const Eigen::MatrixXd r_st = cross_matrix(kernel, new_points, train.x);
      const Eigen::MatrixXd r_ss = build_matrix(kernel, new_points).dense;
      const auto llt = chol_with_jitter(r_tt);
      pieces[k].solve_t = llt.solve(r_st.transpose());
      Eigen::MatrixXd cond_cov = r_ss - r_st * pieces[k].solve_t;
      cond_cov.diagonal().array() += 1e-10;  // exact-interpolation rows are singular
      pieces[k].chol_l = chol_with_jitter(std::move(cond_cov)).matrixL();
      pieces[k].ready = true;
    };
    for (int t = 0; t < m; ++t) {
      const int r = keep[t];
      const int k = kernel_index_of_draw[r];
      prepare(k);
      const double lambda = chain.lambda_draws(r);
      const ShapePair ab = chain.ab_draws.size() > 0
                               ? ShapePair{chain.ab_draws(r, 0), chain.ab_draws(r, 1)}
                               : config.shape;
      const double mean_level = 0.5 * lambda * (ab.a - ab.b);
      const Eigen::VectorXd centered =
          (chain.eta_draws.row(r).transpose().array() - mean_level).matrix();
      const Eigen::VectorXd noise = pieces[k].chol_l * standard_normal_vector(n_new, rng);
      Eigen::VectorXd eta_new = Eigen::VectorXd::Constant(n_new, mean_level) +
                                pieces[k].solve_t.transpose() * centered +
                                std::sqrt(lambda) * noise;
      for (int j = 0; j < n_new; ++j) probs(t, j) = logistic(eta_new(j));
    }
  }

  PredictionSummary out;
  out.mean.resize(n_new);
  out.lower.resize(n_new);
  out.upper.resize(n_new);
  for (int j = 0; j < n_new; ++j) {
    std::vector<double> col(probs.col(j).data(), probs.col(j).data() + m);
    std::sort(col.begin(), col.end());
    out.mean(j) = probs.col(j).mean();
    out.lower(j) = quantile_of_sorted(col, 0.025);
    out.upper(j) = quantile_of_sorted(col, 0.975);
  }
  return out;
}

}  // namespace logibeta
