#include "logibeta/ddp_mixture.hpp"

#include <bit>
#include <chrono>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "logibeta/linalg.hpp"
#include "logibeta/special_math.hpp"

namespace logibeta {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;

double normal_log_pdf(double y, double mean, double tau) {
  return 0.5 * (std::log(tau) - kLog2Pi) - 0.5 * tau * (y - mean) * (y - mean);
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z * std::numbers::sqrt2 / 2.0); }

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

ShapePair StickBreakingSpec::level_shape(int level) const {
  const int h = level + 1;
  return {1.0 - discount, concentration + h * discount};
}

void validate_spec(const StickBreakingSpec& spec) {
  if (spec.truncation < 2) throw std::invalid_argument("StickBreakingSpec: need H >= 2");
  if (!(spec.discount >= 0.0 && spec.discount < 1.0)) {
    throw std::invalid_argument("StickBreakingSpec: discount must lie in [0, 1)");
  }
  if (!(spec.concentration > -spec.discount)) {
    throw std::invalid_argument("StickBreakingSpec: need b > -discount");
  }
  if (!spec.kernel) throw std::invalid_argument("StickBreakingSpec: missing kernel");
  for (int l = 0; l + 1 < spec.truncation; ++l) validate_shape(spec.level_shape(l));
}

void validate_dataset(const RegressionDataset& data) {
  if (data.y.size() < 1) throw std::invalid_argument("RegressionDataset: empty");
  if (data.x.size() != data.y.size()) {
    throw std::invalid_argument("RegressionDataset: covariate/response size mismatch");
  }
}

Eigen::VectorXd stick_weights(const Eigen::VectorXd& eta_levels) {
  const int h_max = static_cast<int>(eta_levels.size()) + 1;
  Eigen::VectorXd w(h_max);
  double remaining = 1.0;
  for (int l = 0; l + 1 < h_max; ++l) {
    const double v = logistic(eta_levels(l));
    w(l) = v * remaining;
    remaining *= (1.0 - v);
  }
  w(h_max - 1) = remaining;  // sigma(eta_H) == 1
  return w;
}

PriorDdpDraw sample_prior_lbddp(const StickBreakingSpec& spec, const Points& points,
                                const AtomPrior& atom_prior, Rng& rng, int polya_truncation) {
  validate_spec(spec);
  const int h_max = spec.truncation;
  const int n = static_cast<int>(points.rows());
  PriorDdpDraw out;
  out.levels.reserve(h_max - 1);
  for (int l = 0; l + 1 < h_max; ++l) {
    out.levels.push_back(
        sample_lbp(spec.level_shape(l), *spec.kernel, points, rng, polya_truncation));
  }
  out.weights.resize(n, h_max);
  Eigen::VectorXd etas(h_max - 1);
  for (int i = 0; i < n; ++i) {
    for (int l = 0; l + 1 < h_max; ++l) etas(l) = out.levels[l].eta(i);
    out.weights.row(i) = stick_weights(etas).transpose();
  }
  const Eigen::LLT<Eigen::Matrix2d> sb_llt(atom_prior.sigma_beta);
  out.atoms.beta0.resize(h_max);
  out.atoms.beta1.resize(h_max);
  out.atoms.tau.resize(h_max);
  for (int h = 0; h < h_max; ++h) {
    Eigen::Vector2d z{rnorm(rng), rnorm(rng)};
    const Eigen::Vector2d beta = sb_llt.matrixL() * z;
    out.atoms.beta0(h) = beta(0);
    out.atoms.beta1(h) = beta(1);
    out.atoms.tau(h) = rgamma(rng, atom_prior.a_tau, atom_prior.b_tau);
  }
  return out;
}

MixtureWorkspace MixtureWorkspace::build(const StickBreakingSpec& spec,
                                         const AtomPrior& atom_prior, const Eigen::VectorXd& x,
                                         int polya_truncation) {
  validate_spec(spec);
  MixtureWorkspace ws;
  ws.spec = spec;
  ws.atom_prior = atom_prior;
  ws.polya_truncation = polya_truncation;
  Points pts(x.size(), 1);
  pts.col(0) = x;
  CorrelationMatrix R = build_matrix(*spec.kernel, pts);
  if (R.factor_is_exact()) {
    ws.phi = std::move(*R.factor);
  } else {
    ws.r_llt = chol_with_jitter(R.dense);
    ws.r_dense = std::move(R.dense);
  }
  return ws;
}

void alg2_step_allocations(MixtureState& state, const RegressionDataset& data, Rng& rng) {
  const int n = data.size();
  const int h_max = static_cast<int>(state.atoms.tau.size());
  Eigen::VectorXd lw(h_max);
  for (int i = 0; i < n; ++i) {
    double stick_tail = 0.0;  // sum of ln(1 - sigma(eta_l)) over l < h
    for (int h = 0; h < h_max; ++h) {
      double lw_h = stick_tail;
      if (h + 1 < h_max) {
        lw_h += log_logistic(state.eta(i, h));
        stick_tail += log_logistic(-state.eta(i, h));
      }
      const double mu = state.atoms.beta0(h) + state.atoms.beta1(h) * data.x(i);
      lw(h) = lw_h + normal_log_pdf(data.y(i), mu, state.atoms.tau(h));
    }
    state.s(i) = sample_categorical_log(lw, rng) + 1;
  }
}

std::vector<int> level_active_set(const Eigen::VectorXi& s, int level) {
  std::vector<int> active;
  active.reserve(s.size());
  for (int i = 0; i < s.size(); ++i) {
    if (s(i) > level) active.push_back(i);
  }
  return active;
}

Eigen::VectorXd level_binary_responses(const Eigen::VectorXi& s, int level,
                                       const std::vector<int>& active) {
  Eigen::VectorXd z(static_cast<int>(active.size()));
  for (std::size_t j = 0; j < active.size(); ++j) {
    z(static_cast<int>(j)) = s(active[j]) == level + 1 ? 1.0 : 0.0;
  }
  return z;
}

namespace {

// One blocked binary-regression Gibbs cycle for level `l`: nested binary data
// over I = {i : s_i > l}, level-specific shapes, adaptive Polya proposal
// with the level's own running average.
void update_level(int l, MixtureState& state, const RegressionDataset& data,
                  const MixtureWorkspace& ws, Rng& rng, long* accepts, long* attempts) {
  const ShapePair shape = ws.spec.level_shape(l);
  const int n = data.size();
  const std::vector<int> active = level_active_set(state.s, l);

  if (active.empty()) {
    // prior redraw of the whole level
    state.lambda(l) = sample_polya(shape, ws.polya_truncation, rng).lambda;
    const double m = 0.5 * state.lambda(l) * (shape.a - shape.b);
    const double s = std::sqrt(state.lambda(l));
    if (ws.low_rank()) {
      Eigen::VectorXd gam = standard_normal_vector(static_cast<int>(ws.phi->cols()), rng);
      state.eta.col(l) = (m + s * (*ws.phi * gam).array()).matrix();
      state.gamma[l] = std::move(gam);
    } else {
      const Eigen::VectorXd noise = ws.r_llt->matrixL() * standard_normal_vector(n, rng);
      state.eta.col(l) = Eigen::VectorXd::Constant(n, m) + s * noise;
    }
    return;
  }

  const int na = static_cast<int>(active.size());
  const Eigen::VectorXd z_level = level_binary_responses(state.s, l, active);
  Eigen::VectorXd eta_sub(na), kappa(na);
  for (int j = 0; j < na; ++j) {
    eta_sub(j) = state.eta(active[j], l);
    kappa(j) = z_level(j) - 0.5;
  }

  // [1] Polya-Gamma refresh on the active set
  Eigen::VectorXd omega(na);
  for (int j = 0; j < na; ++j) omega(j) = sample_polya_gamma_1(eta_sub(j), rng);

  // [2] collapsed lambda move
  const double ms = 0.5 * (shape.a - shape.b);
  std::function<double(double)> ll;
  Eigen::MatrixXd phi_sub, r_sub;
  if (ws.low_rank()) {
    phi_sub.resize(na, ws.phi->cols());
    for (int j = 0; j < na; ++j) phi_sub.row(j) = ws.phi->row(active[j]);
    const Eigen::VectorXd zero_rem = Eigen::VectorXd::Zero(na);
    ll = [&, zero_rem](double lambda) {
      return collapsed_loglik_lowrank(lambda, omega, kappa, ms, phi_sub, zero_rem);
    };
  } else {
    r_sub.resize(na, na);
    for (int j = 0; j < na; ++j) {
      for (int k = 0; k < na; ++k) r_sub(j, k) = (*ws.r_dense)(active[j], active[k]);
    }
    ll = [&](double lambda) {
      return collapsed_loglik_dense(lambda, omega, kappa, ms, r_sub);
    };
  }
  const double cur_ll = ll(state.lambda(l));
  const ShapePair proposal = adaptive_proposal(shape, state.lambda_bar(l));
  const LambdaMove move = step_lambda_mh(state.lambda(l), cur_ll, shape, proposal, ll,
                                         ws.polya_truncation, rng);
  state.lambda(l) = move.lambda;
  if (attempts) ++*attempts;
  if (accepts && move.accepted) ++*accepts;
  state.adapt_count[l] += 1;
  state.lambda_bar(l) += (state.lambda(l) - state.lambda_bar(l)) / state.adapt_count[l];

  // [3] eta on the active set, then the conditional-prior extension
  const double lambda = state.lambda(l);
  const double m = 0.5 * lambda * (shape.a - shape.b);
  if (ws.low_rank()) {
    LowRankEtaDraw draw = step_eta_lowrank(lambda, omega, kappa, shape, phi_sub, *ws.phi, rng);
    state.eta.col(l) = draw.eta;
    state.gamma[l] = std::move(draw.gamma);
  } else {
    const auto llt_sub = chol_with_jitter(r_sub);
    const Eigen::MatrixXd r_inv_sub =
        llt_sub.solve(Eigen::MatrixXd::Identity(na, na));
    const Eigen::VectorXd r_inv_one_sub = llt_sub.solve(Eigen::VectorXd::Ones(na));
    const Eigen::VectorXd eta_active =
        step_eta_dense(lambda, omega, kappa, shape, r_inv_sub, r_inv_one_sub, rng);
    for (int j = 0; j < na; ++j) state.eta(active[j], l) = eta_active(j);

    std::vector<int> rest;
    for (int i = 0; i < n; ++i) {
      if (state.s(i) <= l) rest.push_back(i);
    }
    if (!rest.empty()) {
      const int nr = static_cast<int>(rest.size());
      Eigen::MatrixXd r_ca(nr, na), r_cc(nr, nr);
      for (int j = 0; j < nr; ++j) {
        for (int k = 0; k < na; ++k) r_ca(j, k) = (*ws.r_dense)(rest[j], active[k]);
        for (int k = 0; k < nr; ++k) r_cc(j, k) = (*ws.r_dense)(rest[j], rest[k]);
      }
      const Eigen::MatrixXd solved = llt_sub.solve(r_ca.transpose());
      const Eigen::VectorXd mean = Eigen::VectorXd::Constant(nr, m) +
                                   solved.transpose() * (eta_active.array() - m).matrix();
      Eigen::MatrixXd cov = lambda * (r_cc - r_ca * solved);
      cov.diagonal().array() += 1e-12;
      const auto cov_llt = chol_with_jitter(std::move(cov));
      const Eigen::VectorXd draw = sample_mvn_cov_chol(mean, cov_llt, rng);
      for (int j = 0; j < nr; ++j) state.eta(rest[j], l) = draw(j);
    }
  }
}

}  // namespace

void alg2_step_weights(MixtureState& state, const RegressionDataset& data,
                       const MixtureWorkspace& ws, Rng& rng, long* accepts, long* attempts) {
  for (int l = 0; l + 1 < ws.spec.truncation; ++l) {
    update_level(l, state, data, ws, rng, accepts, attempts);
  }
}

void alg2_step_atoms(MixtureState& state, const RegressionDataset& data, const AtomPrior& prior,
                     Rng& rng) {
  const int h_max = static_cast<int>(state.atoms.tau.size());
  const Eigen::Matrix2d sigma_beta_inv = prior.sigma_beta.inverse();
  const Eigen::LLT<Eigen::Matrix2d> prior_llt(prior.sigma_beta);
  for (int h = 1; h <= h_max; ++h) {
    std::vector<int> members;
    for (int i = 0; i < data.size(); ++i) {
      if (state.s(i) == h) members.push_back(i);
    }
    double beta0, beta1;
    if (members.empty()) {
      Eigen::Vector2d z{rnorm(rng), rnorm(rng)};
      const Eigen::Vector2d beta = prior_llt.matrixL() * z;
      beta0 = beta(0);
      beta1 = beta(1);
      state.atoms.tau(h - 1) = rgamma(rng, prior.a_tau, prior.b_tau);
    } else {
      const int nh = static_cast<int>(members.size());
      Eigen::MatrixXd xh(nh, 2);
      Eigen::VectorXd yh(nh);
      for (int j = 0; j < nh; ++j) {
        xh(j, 0) = 1.0;
        xh(j, 1) = data.x(members[j]);
        yh(j) = data.y(members[j]);
      }
      const double tau = state.atoms.tau(h - 1);
      const Eigen::Matrix2d v_inv = tau * (xh.transpose() * xh) + sigma_beta_inv;
      const Eigen::LLT<Eigen::Matrix2d> v_llt(v_inv);
      const Eigen::Vector2d mean = v_llt.solve(tau * xh.transpose() * yh);
      Eigen::Vector2d z{rnorm(rng), rnorm(rng)};
      const Eigen::Vector2d beta = mean + v_llt.matrixU().solve(z);
      beta0 = beta(0);
      beta1 = beta(1);
      const Eigen::VectorXd resid = yh - xh * beta;
      state.atoms.tau(h - 1) =
          rgamma(rng, prior.a_tau + 0.5 * nh, prior.b_tau + 0.5 * resid.squaredNorm());
    }
    state.atoms.beta0(h - 1) = beta0;
    state.atoms.beta1(h - 1) = beta1;
  }
}

MixtureState init_mixture_state(const RegressionDataset& data, const MixtureWorkspace& ws,
                                Rng& rng) {
  validate_dataset(data);
  const int n = data.size();
  const int h_max = ws.spec.truncation;
  MixtureState state;
  state.s.setOnes(n);
  state.eta.resize(n, h_max - 1);
  state.lambda.resize(h_max - 1);
  state.gamma.assign(h_max - 1, Eigen::VectorXd());
  state.lambda_bar.resize(h_max - 1);
  state.adapt_count.assign(h_max - 1, 1);
  Points pts(n, 1);
  pts.col(0) = data.x;
  for (int l = 0; l + 1 < h_max; ++l) {
    const LBPRealization r =
        sample_lbp(ws.spec.level_shape(l), *ws.spec.kernel, pts, rng, ws.polya_truncation);
    state.eta.col(l) = r.eta;
    state.lambda(l) = r.lambda;
    if (r.gamma) state.gamma[l] = *r.gamma;
    state.lambda_bar(l) = r.lambda;
  }
  const PriorDdpDraw atoms_only = [&] {
    PriorDdpDraw d;
    const Eigen::LLT<Eigen::Matrix2d> sb_llt(ws.atom_prior.sigma_beta);
    d.atoms.beta0.resize(h_max);
    d.atoms.beta1.resize(h_max);
    d.atoms.tau.resize(h_max);
    for (int h = 0; h < h_max; ++h) {
      Eigen::Vector2d z{rnorm(rng), rnorm(rng)};
      const Eigen::Vector2d beta = sb_llt.matrixL() * z;
      d.atoms.beta0(h) = beta(0);
      d.atoms.beta1(h) = beta(1);
      d.atoms.tau(h) = rgamma(rng, ws.atom_prior.a_tau, ws.atom_prior.b_tau);
    }
    return d;
  }();
  state.atoms = atoms_only.atoms;
  alg2_step_allocations(state, data, rng);
  return state;
}

MixtureChainOutput run_mixture_chain(const StickBreakingSpec& spec, const AtomPrior& atom_prior,
                                     const RegressionDataset& data, int iterations, int burn_in,
                                     std::uint64_t seed, int polya_truncation) {
  if (iterations <= burn_in || burn_in < 0) {
    throw std::invalid_argument("run_mixture_chain: need iterations > burn_in >= 0");
  }
  const MixtureWorkspace ws = MixtureWorkspace::build(spec, atom_prior, data.x, polya_truncation);
  const int h_max = spec.truncation;
  const int n = data.size();

  Rng init_rng(derive_stream(seed, 0, 0));
  MixtureState state = init_mixture_state(data, ws, init_rng);

  const int retained = iterations - burn_in;
  MixtureChainOutput out;
  out.lambda_draws.resize(retained, h_max - 1);
  out.beta0_draws.resize(retained, h_max);
  out.beta1_draws.resize(retained, h_max);
  out.tau_draws.resize(retained, h_max);
  out.occupancy.resize(retained, h_max);
  if (ws.low_rank()) {
    out.gamma_draws.reserve(retained);
  } else {
    out.eta_draws.reserve(retained);
  }
  out.seed = seed;
  out.iterations = iterations;
  out.burn_in = burn_in;
  out.train_x = data.x;

  const auto t0 = std::chrono::steady_clock::now();
  for (int iter = 1; iter <= iterations; ++iter) {
    {
      Rng alloc_rng(derive_stream(seed, iter, h_max + 1));
      alg2_step_allocations(state, data, alloc_rng);
    }
    // per-level streams: independent given allocations, deterministic
    for (int l = 0; l + 1 < h_max; ++l) {
      Rng level_rng(derive_stream(seed, iter, l + 1));
      update_level(l, state, data, ws, level_rng, &out.lambda_accepts, &out.lambda_attempts);
    }
    {
      Rng atom_rng(derive_stream(seed, iter, h_max + 2));
      alg2_step_atoms(state, data, atom_prior, atom_rng);
    }

    Eigen::VectorXi counts = Eigen::VectorXi::Zero(h_max);
    for (int i = 0; i < n; ++i) counts(state.s(i) - 1) += 1;
    if ((counts.array() > 0).all()) out.saturated = true;

    if (iter > burn_in) {
      const int r = iter - burn_in - 1;
      out.lambda_draws.row(r) = state.lambda.transpose();
      out.beta0_draws.row(r) = state.atoms.beta0.transpose();
      out.beta1_draws.row(r) = state.atoms.beta1.transpose();
      out.tau_draws.row(r) = state.atoms.tau.transpose();
      out.occupancy.row(r) = counts.transpose();
      if (ws.low_rank()) {
        Eigen::MatrixXd g(ws.phi->cols(), h_max - 1);
        for (int l = 0; l + 1 < h_max; ++l) g.col(l) = state.gamma[l];
        out.gamma_draws.push_back(std::move(g));
      } else {
        out.eta_draws.push_back(state.eta);
      }
    }
  }
  out.sampler_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

// ---------------------------------------------------------------------------
// Posterior summaries
// ---------------------------------------------------------------------------

namespace {

// Per-draw level fields at a single new covariate value.
struct LevelFieldsAtX {
  std::vector<Eigen::VectorXd> per_draw;  // each H-1
};

LevelFieldsAtX level_fields_at(const MixtureChainOutput& chain, const StickBreakingSpec& spec,
                               double x, const std::vector<int>& keep) {
  const int h_max = spec.truncation;
  LevelFieldsAtX out;
  out.per_draw.resize(keep.size());
  const bool low_rank = !chain.gamma_draws.empty();
  if (low_rank) {
    Points px(1, 1);
    px(0, 0) = x;
    const auto phi_x = spec.kernel->feature_rows(px);
    if (!phi_x) throw std::invalid_argument("conditional summaries: kernel has no feature rows");
    const Eigen::VectorXd phi_row = phi_x->row(0).transpose();
    for (std::size_t t = 0; t < keep.size(); ++t) {
      const int r = keep[t];
      Eigen::VectorXd etas(h_max - 1);
      for (int l = 0; l + 1 < h_max; ++l) {
        const ShapePair s = spec.level_shape(l);
        const double lambda = chain.lambda_draws(r, l);
        etas(l) = 0.5 * lambda * (s.a - s.b) +
                  std::sqrt(lambda) * phi_row.dot(chain.gamma_draws[r].col(l));
      }
      out.per_draw[t] = std::move(etas);
    }
    return out;
  }

  // dense path: conditional Gaussian per level given the stored train fields
  Points pts(chain.train_x.size(), 1);
  pts.col(0) = chain.train_x;
  const Eigen::MatrixXd r_tt = build_matrix(*spec.kernel, pts).dense;
  const auto llt = chol_with_jitter(r_tt);
  Eigen::VectorXd r_x(chain.train_x.size());
  Points px(1, 1);
  px(0, 0) = x;
  for (int i = 0; i < chain.train_x.size(); ++i) {
    r_x(i) = (*spec.kernel)(px.row(0), pts.row(i));
  }
  const Eigen::VectorXd w = llt.solve(r_x);
  const double resid_var_unit = std::max(0.0, 1.0 - r_x.dot(w));
  Rng rng(derive_stream(chain.seed, 0x9d5f, std::bit_cast<std::uint64_t>(x)));
  for (std::size_t t = 0; t < keep.size(); ++t) {
    const int r = keep[t];
    Eigen::VectorXd etas(h_max - 1);
    for (int l = 0; l + 1 < h_max; ++l) {
      const ShapePair s = spec.level_shape(l);
      const double lambda = chain.lambda_draws(r, l);
      const double m = 0.5 * lambda * (s.a - s.b);
      const double mean = m + w.dot((chain.eta_draws[r].col(l).array() - m).matrix());
      etas(l) = mean + std::sqrt(lambda * resid_var_unit) * rnorm(rng);
    }
    out.per_draw[t] = std::move(etas);
  }
  return out;
}

std::vector<int> kept_indices(int retained, int thin) {
  if (thin < 1) thin = 1;
  std::vector<int> keep;
  for (int r = 0; r < retained; r += thin) keep.push_back(r);
  return keep;
}

double quantile_of_sorted(std::vector<double>& v, double p) {
  std::sort(v.begin(), v.end());
  const auto n = v.size();
  if (n == 1) return v[0];
  const double pos = p * static_cast<double>(n - 1);
  const auto lo = static_cast<std::size_t>(pos);
  const auto hi = std::min(lo + 1, n - 1);
  const double wgt = pos - static_cast<double>(lo);
  return (1.0 - wgt) * v[lo] + wgt * v[hi];
}

}  // namespace

DensitySummary conditional_density(const MixtureChainOutput& chain, const StickBreakingSpec& spec,
                                   double x, const Eigen::VectorXd& y_grid, int thin,
                                   bool want_bands) {
  if (chain.retained() < 1) throw std::invalid_argument("conditional_density: empty chain");
  const std::vector<int> keep = kept_indices(chain.retained(), thin);
  const LevelFieldsAtX fields = level_fields_at(chain, spec, x, keep);
  const int g = static_cast<int>(y_grid.size());
  const int h_max = spec.truncation;

  Eigen::VectorXd mean = Eigen::VectorXd::Zero(g);
  Eigen::MatrixXd all;
  if (want_bands) all.resize(static_cast<int>(keep.size()), g);

  Eigen::ArrayXd dens(g);
  for (std::size_t t = 0; t < keep.size(); ++t) {
    const int r = keep[t];
    const Eigen::VectorXd w = stick_weights(fields.per_draw[t]);
    dens.setZero();
    for (int h = 0; h < h_max; ++h) {
      const double mu = chain.beta0_draws(r, h) + chain.beta1_draws(r, h) * x;
      const double tau = chain.tau_draws(r, h);
      const double norm = w(h) * std::sqrt(tau / (2.0 * std::numbers::pi));
      dens += norm * (-0.5 * tau * (y_grid.array() - mu).square()).exp();
    }
    mean += dens.matrix();
    if (want_bands) all.row(static_cast<int>(t)) = dens.matrix().transpose();
  }
  mean /= static_cast<double>(keep.size());

  DensitySummary out;
  out.mean = std::move(mean);
  if (want_bands) {
    out.lower.resize(g);
    out.upper.resize(g);
    for (int j = 0; j < g; ++j) {
      std::vector<double> col(all.col(j).data(), all.col(j).data() + all.rows());
      out.lower(j) = quantile_of_sorted(col, 0.025);
      out.upper(j) = quantile_of_sorted(col, 0.975);
    }
  }
  return out;
}

CdfSummary conditional_cdf(const MixtureChainOutput& chain, const StickBreakingSpec& spec,
                           double x, double threshold, int thin) {
  if (chain.retained() < 1) throw std::invalid_argument("conditional_cdf: empty chain");
  const std::vector<int> keep = kept_indices(chain.retained(), thin);
  const LevelFieldsAtX fields = level_fields_at(chain, spec, x, keep);
  const int h_max = spec.truncation;
  std::vector<double> values(keep.size());
  for (std::size_t t = 0; t < keep.size(); ++t) {
    const int r = keep[t];
    const Eigen::VectorXd w = stick_weights(fields.per_draw[t]);
    double p = 0.0;
    for (int h = 0; h < h_max; ++h) {
      const double mu = chain.beta0_draws(r, h) + chain.beta1_draws(r, h) * x;
      const double sd = 1.0 / std::sqrt(chain.tau_draws(r, h));
      p += w(h) * normal_cdf((threshold - mu) / sd);
    }
    values[t] = p;
  }
  CdfSummary out;
  out.mean = 0.0;
  for (double v : values) out.mean += v;
  out.mean /= static_cast<double>(values.size());
  std::vector<double> tmp = values;
  out.lower = quantile_of_sorted(tmp, 0.025);
  tmp = values;
  out.upper = quantile_of_sorted(tmp, 0.975);
  return out;
}

double conditional_mean(const MixtureChainOutput& chain, const StickBreakingSpec& spec, double x,
                        int thin) {
  if (chain.retained() < 1) throw std::invalid_argument("conditional_mean: empty chain");
  const std::vector<int> keep = kept_indices(chain.retained(), thin);
  const LevelFieldsAtX fields = level_fields_at(chain, spec, x, keep);
  const int h_max = spec.truncation;
  double acc = 0.0;
  for (std::size_t t = 0; t < keep.size(); ++t) {
    const int r = keep[t];
    const Eigen::VectorXd w = stick_weights(fields.per_draw[t]);
    double m = 0.0;
    for (int h = 0; h < h_max; ++h) {
      m += w(h) * (chain.beta0_draws(r, h) + chain.beta1_draws(r, h) * x);
    }
    acc += m;
  }
  return acc / static_cast<double>(keep.size());
}

}  // namespace logibeta
