#include "logibeta/polya.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "logibeta/special_math.hpp"

namespace logibeta {

void validate_shape(const ShapePair& shape) {
  if (!(shape.a > 0.0) || !(shape.b > 0.0)) {
    throw std::invalid_argument("ShapePair: both shape parameters must be positive");
  }
}

PolyaDraw sample_polya(const ShapePair& shape, int truncation, Rng& rng) {
  validate_shape(shape);
  if (truncation < 1) throw std::invalid_argument("sample_polya: truncation must be >= 1");
  const double a = shape.a, b = shape.b;
  double sum = 0.0;
  for (int k = 0; k < truncation; ++k) {
    sum += 2.0 * rexp(rng) / ((k + a) * (k + b));
  }
  // deterministic tail-mean compensation
  double tail;
  if (std::abs(a - b) < 1e-9) {
    tail = 2.0 * trigamma(truncation + 0.5 * (a + b));
  } else {
    tail = 2.0 * (digamma(truncation + a) - digamma(truncation + b)) / (a - b);
  }
  return {sum + tail, truncation};
}

PolyaLogDensityResult polya_log_density(double lambda, const ShapePair& shape, double tol) {
  validate_shape(shape);
  if (!(lambda > 0.0)) throw std::invalid_argument("polya_log_density: lambda must be positive");
  if (!(tol > 0.0)) throw std::invalid_argument("polya_log_density: tol must be positive");

  const double a = shape.a, b = shape.b;
  const double c = a + b;
  const double lgamma_c = std::lgamma(c);
  const double log_beta_ab = log_beta(a, b);
  constexpr int kBudget = 10000;

  // Alternating series of generalized-binomial terms,
  //   t_k = (-1)^k C(c+k-1, k) (k + c/2) exp{-(k+a)(k+b) lambda/2} / B(a,b),
  // accumulated in long double relative to the running maximum log term.
  long double acc = 0.0L;
  double ref = -std::numeric_limits<double>::infinity();
  double prev_mag = -std::numeric_limits<double>::infinity();
  for (int k = 0; k < kBudget; ++k) {
    const double log_mag = std::lgamma(c + k) - std::lgamma(static_cast<double>(k) + 1.0) -
                           lgamma_c + std::log(k + 0.5 * c) - log_beta_ab -
                           0.5 * (k + a) * (k + b) * lambda;
    if (log_mag > ref) {
      if (std::isfinite(ref)) acc *= std::exp(static_cast<long double>(ref - log_mag));
      ref = log_mag;
    }
    const long double term = std::exp(static_cast<long double>(log_mag - ref));
    acc += (k % 2 == 0) ? term : -term;

    const bool decaying = log_mag < prev_mag;
    prev_mag = log_mag;
    if (decaying && acc > 0.0L &&
        term < static_cast<long double>(tol) * acc) {
      return {ref + static_cast<double>(std::log(acc)), true, k + 1};
    }
  }
  return {std::numeric_limits<double>::quiet_NaN(), false, kBudget};
}

double polya_identity_log_factor(double lambda, const ShapePair& from, const ShapePair& to) {
  validate_shape(from);
  validate_shape(to);
  if (std::abs((from.a + from.b) - (to.a + to.b)) > 1e-12) {
    throw std::invalid_argument("polya_identity_log_factor: shape sums must match");
  }
  return log_beta(from.a, from.b) - log_beta(to.a, to.b) +
         0.5 * lambda * (from.a * from.b - to.a * to.b);
}

PolyaMoments polya_moments(const ShapePair& shape) {
  validate_shape(shape);
  const double a = shape.a, b = shape.b;
  if (std::abs(a - b) < 1e-9) {
    const double m = 0.5 * (a + b);
    return {2.0 * trigamma(m), 2.0 * polygamma3(m) / 3.0};
  }
  const double d = a - b;
  const double psi_diff = digamma(a) - digamma(b);
  const double mean = 2.0 * psi_diff / d;
  const double variance = 4.0 / (d * d) * (trigamma(a) + trigamma(b) - 2.0 * psi_diff / d);
  return {mean, variance};
}

// ---------------------------------------------------------------------------
// PG(1, c) sampler: PG(1,c) = J*(1, c/2)/4, with J*(1,z) drawn by the
// alternating-series rejection method on the two-sided Jacobi-theta
// representation (Devroye-style, as used for Polya-Gamma augmentation).
// ---------------------------------------------------------------------------

namespace {

constexpr double kJacobiTrunc = 0.64;  // series switch point t

// a_n(x): partial-sum coefficients of the J*(1,0) density, piecewise in x.
double jacobi_coef(int n, double x) {
  const double np = n + 0.5;
  if (x <= kJacobiTrunc) {
    return std::numbers::pi * np * std::pow(2.0 / (std::numbers::pi * x), 1.5) *
           std::exp(-2.0 * np * np / x);
  }
  return std::numbers::pi * np *
         std::exp(-0.5 * np * np * std::numbers::pi * std::numbers::pi * x);
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z * std::numbers::sqrt2 / 2.0); }

double log_normal_cdf(double z) {
  if (z > -10.0) return std::log(normal_cdf(z));
  // Mills-ratio asymptotic for the deep lower tail.
  const double z2 = z * z;
  return -0.5 * z2 - std::log(-z) - 0.5 * std::log(2.0 * std::numbers::pi) +
         std::log1p(-1.0 / z2 + 3.0 / (z2 * z2));
}

// P(IG(1/z, 1) <= t); valid at z = 0 (one-sided stable limit).
double inv_gauss_cdf_at(double z, double t) {
  const double rt = 1.0 / std::sqrt(t);
  double mass = normal_cdf(rt * (t * z - 1.0));
  mass += std::exp(2.0 * z + log_normal_cdf(-rt * (t * z + 1.0)));
  return mass;
}

// Inverse-Gaussian IG(mu = 1/z, lambda = 1) truncated to (0, t].
double sample_trunc_inv_gauss(double z, double t, Rng& rng) {
  if (z < 1.0 / t) {
    // mu > t: rejection from the one-sided-stable proposal, tilted by exp(-z^2 x/2)
    while (true) {
      double e1, e2;
      do {
        e1 = rexp(rng);
        e2 = rexp(rng);
      } while (e1 * e1 > 2.0 * e2 / t);
      const double x = t / ((1.0 + t * e1) * (1.0 + t * e1));
      if (std::log(runif(rng)) <= -0.5 * z * z * x) return x;
    }
  }
  const double mu = 1.0 / z;
  while (true) {
    const double y = rnorm(rng);
    const double y2 = y * y;
    double x = mu + 0.5 * mu * mu * y2 -
               0.5 * mu * std::sqrt(4.0 * mu * y2 + mu * mu * y2 * y2);
    if (runif(rng) > mu / (mu + x)) x = mu * mu / x;
    if (x <= t) return x;
  }
}

double sample_jacobi_star(double z, Rng& rng) {
  const double t = kJacobiTrunc;
  const double rate = 0.125 * std::numbers::pi * std::numbers::pi + 0.5 * z * z;
  const double p_right = 0.5 * std::numbers::pi / rate * std::exp(-rate * t);
  const double p_left = 2.0 * std::exp(-z) * inv_gauss_cdf_at(z, t);
  while (true) {
    double x;
    if (runif(rng) * (p_right + p_left) <= p_right) {
      x = t + rexp(rng) / rate;  // truncated exponential right of t
    } else {
      x = sample_trunc_inv_gauss(z, t, rng);
    }
    // squeeze by alternating partial sums
    double s = jacobi_coef(0, x);
    const double y = runif(rng) * s;
    int n = 0;
    while (true) {
      ++n;
      if (n % 2 == 1) {
        s -= jacobi_coef(n, x);
        if (y <= s) return x;
      } else {
        s += jacobi_coef(n, x);
        if (y > s) break;
      }
    }
  }
}

}  // namespace

double sample_polya_gamma_1(double c, Rng& rng) {
  const double z = 0.5 * std::abs(c);
  return 0.25 * sample_jacobi_star(z, rng);
}

}  // namespace logibeta
