#include "logibeta/prior_dependence.hpp"

#include <cmath>
#include <stdexcept>

#include "logibeta/special_math.hpp"

namespace logibeta {

namespace {

struct PairAccumulator {
  double sum_vv = 0.0, sum_vv2 = 0.0;
  double sum_v1 = 0.0, sum_v2 = 0.0, sum_v1sq = 0.0, sum_v2sq = 0.0;
  long n = 0;

  void add(double v1, double v2) {
    const double p = v1 * v2;
    sum_vv += p;
    sum_vv2 += p * p;
    sum_v1 += v1;
    sum_v2 += v2;
    sum_v1sq += v1 * v1;
    sum_v2sq += v2 * v2;
    ++n;
  }
  MonteCarloEstimate mu() const {
    const double mean = sum_vv / n;
    const double var = sum_vv2 / n - mean * mean;
    return {mean, std::sqrt(std::max(0.0, var) / n), n};
  }
  MonteCarloEstimate corr() const {
    const double m1 = sum_v1 / n, m2 = sum_v2 / n;
    const double v1 = sum_v1sq / n - m1 * m1;
    const double v2 = sum_v2sq / n - m2 * m2;
    const double cov = sum_vv / n - m1 * m2;
    const double c = cov / std::sqrt(v1 * v2);
    // delta-method SE for a correlation estimate
    const double se = (1.0 - c * c) / std::sqrt(static_cast<double>(n));
    return {c, se, n};
  }
};

// One pass of paired logistic-transformed LB draws with correlation r12.
PairAccumulator sample_pairs(double r12, const ShapePair& shape, long nsim, std::uint64_t seed,
                             int polya_truncation) {
  validate_shape(shape);
  if (!(r12 >= -1.0 && r12 <= 1.0)) throw std::invalid_argument("mu_mc: r12 must be in [-1,1]");
  Rng rng(seed);
  PairAccumulator acc;
  const double ms = 0.5 * (shape.a - shape.b);
  const double root = std::sqrt(std::max(0.0, 1.0 - r12 * r12));
  for (long t = 0; t < nsim; ++t) {
    const double lambda = sample_polya(shape, polya_truncation, rng).lambda;
    const double s = std::sqrt(lambda);
    const double z1 = rnorm(rng);
    const double z2 = rnorm(rng);
    const double eta1 = ms * lambda + s * z1;
    const double eta2 = ms * lambda + s * (r12 * z1 + root * z2);
    acc.add(logistic(eta1), logistic(eta2));
  }
  return acc;
}

}  // namespace

MonteCarloEstimate mu_mc(const CorrelationKernel& kernel, const Eigen::RowVectorXd& x,
                         const Eigen::RowVectorXd& x2, const ShapePair& shape, long nsim,
                         std::uint64_t seed, int polya_truncation) {
  if (nsim < 10000) throw std::invalid_argument("mu_mc: need nsim >= 1e4");
  return sample_pairs(kernel(x, x2), shape, nsim, seed, polya_truncation).mu();
}

MonteCarloEstimate mu_mc_corr(double r12, const ShapePair& shape, long nsim, std::uint64_t seed,
                              int polya_truncation) {
  if (nsim < 10000) throw std::invalid_argument("mu_mc_corr: need nsim >= 1e4");
  return sample_pairs(r12, shape, nsim, seed, polya_truncation).mu();
}

double mu_diagonal(double b) {
  if (!(b > 0.0)) throw std::domain_error("mu_diagonal: b must be positive");
  return 2.0 / ((1.0 + b) * (2.0 + b));
}

MonteCarloEstimate stick_corr_mc(double r12, const ShapePair& shape, long nsim,
                                 std::uint64_t seed, int polya_truncation) {
  if (nsim < 10000) throw std::invalid_argument("stick_corr_mc: need nsim >= 1e4");
  return sample_pairs(r12, shape, nsim, seed, polya_truncation).corr();
}

double tie_probability(double mu, double b) {
  if (!(b > 0.0)) throw std::domain_error("tie_probability: b must be positive");
  if (!(mu > 0.0) || !(mu <= 2.0 / (1.0 + b))) {
    throw std::domain_error("tie_probability: need 0 < mu <= 2/(1+b)");
  }
  return (1.0 + b) / (2.0 / mu - (1.0 + b));
}

double corr_rpm(double mu, double b, double rho0) {
  if (!(b > 0.0)) throw std::domain_error("corr_rpm: b must be positive");
  if (!(mu > 0.0) || !(mu <= 2.0 / (1.0 + b))) {
    throw std::domain_error("corr_rpm: need 0 < mu <= 2/(1+b)");
  }
  if (!(rho0 >= -1.0 && rho0 <= 1.0)) throw std::domain_error("corr_rpm: rho0 must be in [-1,1]");
  return rho0 * (1.0 + b) * (1.0 + b) / (2.0 / mu - (1.0 + b));
}

CompetitorBounds competitor_corr_bounds(double b, long mc_nsim, std::uint64_t seed) {
  if (!(b > 0.0)) throw std::domain_error("competitor_corr_bounds: b must be positive");
  CompetitorBounds out;

  // M1: logistic-beta sticks at kernel correlation -1
  {
    const ShapePair shape{1.0, b};
    const PairAccumulator acc = sample_pairs(-1.0, shape, mc_nsim, seed, 400);
    out.m1_stick_corr = acc.corr();
    const MonteCarloEstimate mu = acc.mu();
    out.m1_rpm = {corr_rpm(mu.value, b),
                  std::abs(corr_rpm(mu.value + mu.se, b) - corr_rpm(mu.value - mu.se, b)) / 2.0,
                  mu.nsim};
  }

  // M2: squared-AR(1) sticks; closed forms, RPM limit 0.75 as b -> inf
  out.m2_stick_corr = std::sqrt(b) * (b + 1.0) * std::sqrt(b + 2.0) - b * (b + 2.0);
  out.m2_rpm =
      (1.0 + b) /
      (2.0 * std::sqrt(b + 2.0) / (std::pow(b, 1.5) + (1.0 - b) * std::sqrt(b + 2.0)) - 1.0);

  // M3: independent sticks
  out.m3_stick_corr = 0.0;
  out.m3_rpm = (1.0 + b) / (1.0 + 2.0 * b);

  // M4: Frechet lower bound, counter-monotonic Beta(1,b) sticks
  {
    Rng rng(mix_seed(seed ^ 0x4d34ULL));
    PairAccumulator acc;
    const double inv_b = 1.0 / b;
    for (long t = 0; t < mc_nsim; ++t) {
      const double u = runif(rng);
      const double v = 1.0 - std::pow(u, inv_b);          // F_B^{-1}(1-u), Beta(1,b)
      const double v_cm = 1.0 - std::pow(1.0 - u, inv_b); // counter-monotonic partner
      acc.add(v, v_cm);
    }
    out.m4_stick_corr = acc.corr();
    const MonteCarloEstimate mu = acc.mu();
    out.m4_rpm = {corr_rpm(mu.value, b),
                  std::abs(corr_rpm(mu.value + mu.se, b) - corr_rpm(mu.value - mu.se, b)) / 2.0,
                  mu.nsim};
  }
  return out;
}

std::vector<MonteCarloEstimate> continuity_check(const CorrelationKernel& kernel, double b,
                                                 const std::vector<double>& distances, long nsim,
                                                 std::uint64_t seed, int polya_truncation) {
  if (!(b > 0.0)) throw std::domain_error("continuity_check: b must be positive");
  const ShapePair shape{1.0, b};
  const int d = 1;  // distances interpreted along the first coordinate
  std::vector<double> r12(distances.size());
  for (std::size_t k = 0; k < distances.size(); ++k) {
    Eigen::RowVectorXd x = Eigen::RowVectorXd::Zero(d);
    Eigen::RowVectorXd x2 = Eigen::RowVectorXd::Zero(d);
    x2(0) = distances[k];
    r12[k] = kernel(x, x2);
  }
  // common random numbers across the distance sequence
  std::vector<PairAccumulator> acc(distances.size());
  Rng rng(seed);
  for (long t = 0; t < nsim; ++t) {
    const double lambda = sample_polya(shape, polya_truncation, rng).lambda;
    const double s = std::sqrt(lambda);
    const double ms = 0.5 * (shape.a - shape.b);
    const double z1 = rnorm(rng);
    const double z2 = rnorm(rng);
    for (std::size_t k = 0; k < distances.size(); ++k) {
      const double root = std::sqrt(std::max(0.0, 1.0 - r12[k] * r12[k]));
      const double eta1 = ms * lambda + s * z1;
      const double eta2 = ms * lambda + s * (r12[k] * z1 + root * z2);
      acc[k].add(logistic(eta1), logistic(eta2));
    }
  }
  std::vector<MonteCarloEstimate> out(distances.size());
  for (std::size_t k = 0; k < distances.size(); ++k) {
    const MonteCarloEstimate mu = acc[k].mu();
    out[k] = {corr_rpm(mu.value, b),
              std::abs(corr_rpm(std::min(mu.value + mu.se, 2.0 / (1.0 + b) - 1e-12), b) -
                       corr_rpm(mu.value - mu.se, b)) /
                  2.0,
              mu.nsim};
  }
  return out;
}

}  // namespace logibeta
