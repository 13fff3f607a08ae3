#include "logibeta/special_math.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace logibeta {

namespace {

void require_positive(double x, const char* fn) {
  if (!(x > 0.0)) throw std::domain_error(std::string(fn) + ": argument must be positive");
}

// Asymptotic tails use Bernoulli numbers B2..B14.
constexpr double kB[7] = {1.0 / 6.0,  -1.0 / 30.0,      1.0 / 42.0, -1.0 / 30.0,
                          5.0 / 66.0, -691.0 / 2730.0,  7.0 / 6.0};

}  // namespace

// Recurrence shift to x >= 10, then the asymptotic expansion
//   psi(x) ~ ln x - 1/(2x) - sum_k B_{2k}/(2k x^{2k}).
double digamma(double x) {
  require_positive(x, "digamma");
  double result = 0.0;
  while (x < 10.0) {
    result -= 1.0 / x;
    x += 1.0;
  }
  const double inv = 1.0 / x;
  const double inv2 = inv * inv;
  double series = 0.0;
  double p = inv2;
  for (int k = 0; k < 7; ++k) {
    series += kB[k] / (2.0 * (k + 1)) * p;
    p *= inv2;
  }
  return result + std::log(x) - 0.5 * inv - series;
}

// psi'(x) ~ 1/x + 1/(2x^2) + sum_k B_{2k} x^{-2k-1} after shifting to x >= 10.
double trigamma(double x) {
  require_positive(x, "trigamma");
  double result = 0.0;
  while (x < 10.0) {
    result += 1.0 / (x * x);
    x += 1.0;
  }
  const double inv = 1.0 / x;
  const double inv2 = inv * inv;
  double series = 0.0;
  double p = inv * inv2;
  for (int k = 0; k < 7; ++k) {
    series += kB[k] * p;
    p *= inv2;
  }
  return result + inv + 0.5 * inv2 + series;
}

// psi'''(x) ~ 2/x^3 + 3/x^4 + sum_k B_{2k} (2k+1)(2k+2) x^{-2k-3} for x >= 14.
double polygamma3(double x) {
  require_positive(x, "polygamma3");
  double result = 0.0;
  while (x < 14.0) {
    const double x2 = x * x;
    result += 6.0 / (x2 * x2);
    x += 1.0;
  }
  const double inv = 1.0 / x;
  const double inv2 = inv * inv;
  const double inv3 = inv * inv2;
  double series = 0.0;
  double p = inv3 * inv2;
  for (int k = 0; k < 7; ++k) {
    series += kB[k] * (2 * k + 3) * (2 * k + 4) * p;
    p *= inv2;
  }
  return result + 2.0 * inv3 + 3.0 * inv2 * inv2 + series;
}

double log_beta(double a, double b) {
  if (!(a > 0.0) || !(b > 0.0)) throw std::domain_error("log_beta: arguments must be positive");
  return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
}

namespace {

// Taylor coefficients of 1/Gamma(z) = sum_{k>=1} c_k z^k
// (Abramowitz & Stegun 6.1.34).
constexpr double kInvGammaCoef[26] = {
    1.00000000000000000000,  0.57721566490153286061,  -0.65587807152025388108,
    -0.04200263503409523553, 0.16653861138229148950,  -0.04219773455554433675,
    -0.00962197152787697356, 0.00721894324666309954,  -0.00116516759185906511,
    -0.00021524167411495097, 0.00012805028238811619,  -0.00002013485478078824,
    -0.00000125049348214267, 0.00000113302723198170,  -0.00000020563384169776,
    0.00000000611609510448,  0.00000000500200764447,  -0.00000000118127457049,
    0.00000000010434267117,  0.00000000000778226344,  -0.00000000000369680562,
    0.00000000000051003703,  -0.00000000000002058326, -0.00000000000000534812,
    0.00000000000000122678,  -0.00000000000000011813};

// 1/Gamma(1+mu) for |mu| <= 1/2, via 1/Gamma(1+mu) = sum_k c_k mu^{k-1}.
double inv_gamma1p(double mu) {
  double s = 0.0;
  for (int k = 25; k >= 0; --k) s = s * mu + kInvGammaCoef[k];
  return s;
}

// gam1 = [1/Gamma(1-mu) - 1/Gamma(1+mu)]/(2 mu), stable at mu = 0 via the
// even part of the coefficient series; gam2 = [1/Gamma(1-mu) + 1/Gamma(1+mu)]/2.
void temme_gamma(double mu, double& g_1pmu, double& g_1mmu, double& gam1, double& gam2) {
  g_1pmu = inv_gamma1p(mu);
  g_1mmu = inv_gamma1p(-mu);
  const double mu2 = mu * mu;
  double s1 = 0.0, s2 = 0.0;
  for (int k = 25; k >= 1; k -= 2) s1 = s1 * mu2 + kInvGammaCoef[k];    // c2 + c4 mu^2 + ...
  for (int k = 24; k >= 0; k -= 2) s2 = s2 * mu2 + kInvGammaCoef[k];    // c1 + c3 mu^2 + ...
  gam1 = -s1;
  gam2 = s2;
}

// Temme's series for K_mu(x) and K_{mu+1}(x), x <= 2, |mu| <= 1/2.
void bessel_k_temme(double mu, double x, double& k_mu, double& k_mup1) {
  constexpr double eps = std::numeric_limits<double>::epsilon();
  const double ln_half_x = std::log(0.5 * x);
  const double sigma = -mu * ln_half_x;
  double g_1pmu, g_1mmu, gam1, gam2;
  temme_gamma(mu, g_1pmu, g_1mmu, gam1, gam2);
  const double sin_rat =
      (std::abs(mu) < 1e-14) ? 1.0 : std::numbers::pi * mu / std::sin(std::numbers::pi * mu);
  const double sinh_rat = (std::abs(sigma) < 1e-10) ? 1.0 + sigma * sigma / 6.0
                                                    : std::sinh(sigma) / sigma;
  double fk = sin_rat * (std::cosh(sigma) * gam1 - sinh_rat * ln_half_x * gam2);
  double pk = 0.5 * std::exp(-mu * ln_half_x) / g_1pmu;  // 0.5 (x/2)^{-mu} Gamma(1+mu)
  double qk = 0.5 * std::exp(mu * ln_half_x) / g_1mmu;   // 0.5 (x/2)^{+mu} Gamma(1-mu)
  double hk = pk;
  double ck = 1.0;
  double sum0 = fk;
  double sum1 = hk;
  const double x2_4 = 0.25 * x * x;
  for (int k = 1; k <= 2000; ++k) {
    fk = (k * fk + pk + qk) / (k * k - mu * mu);
    ck *= x2_4 / k;
    pk /= (k - mu);
    qk /= (k + mu);
    hk = -k * fk + pk;
    const double del0 = ck * fk;
    const double del1 = ck * hk;
    sum0 += del0;
    sum1 += del1;
    if (std::abs(del0) < eps * std::abs(sum0) && std::abs(del1) < eps * std::abs(sum1)) break;
  }
  k_mu = sum0;
  k_mup1 = sum1 * (2.0 / x);
}

// Steed/Thompson-Barnett continued fraction CF2 for x > 2, |mu| <= 1/2.
void bessel_k_cf2(double mu, double x, double& k_mu, double& k_mup1) {
  constexpr double eps = std::numeric_limits<double>::epsilon();
  double b = 2.0 * (1.0 + x);
  double d = 1.0 / b;
  double delh = d;
  double h = delh;
  double q1 = 0.0, q2 = 1.0;
  const double a1 = 0.25 - mu * mu;
  double q = a1, c = a1;
  double a = -a1;
  double s = 1.0 + q * delh;
  for (int i = 2; i <= 20000; ++i) {
    a -= 2.0 * (i - 1);
    c = -a * c / i;
    const double qnew = (q1 - b * q2) / a;
    q1 = q2;
    q2 = qnew;
    q += c * qnew;
    b += 2.0;
    d = 1.0 / (b + a * d);
    delh = (b * d - 1.0) * delh;
    h += delh;
    const double dels = q * delh;
    s += dels;
    if (std::abs(dels / s) < eps) break;
  }
  h = a1 * h;
  k_mu = std::sqrt(std::numbers::pi / (2.0 * x)) * std::exp(-x) / s;
  k_mup1 = k_mu * (mu + x + 0.5 - h) / x;
}

// K_{n+1/2}(x) = sqrt(pi/(2x)) e^{-x} sum_{j=0}^{n} (n+j)! / (j!(n-j)!(2x)^j).
double bessel_k_half_integer(int n, double x) {
  double sum = 1.0;
  double term = 1.0;
  for (int j = 1; j <= n; ++j) {
    // ratio of consecutive terms: (n+j)(n-j+1)/(2j x) ... times 1/(2)? derive:
    // t_j/t_{j-1} = (n+j)(n-j+1) / (j * 2x)
    term *= static_cast<double>(n + j) * static_cast<double>(n - j + 1) / (2.0 * j * x);
    sum += term;
  }
  return std::sqrt(std::numbers::pi / (2.0 * x)) * std::exp(-x) * sum;
}

}  // namespace

double bessel_k_general(double nu, double x) {
  require_positive(x, "bessel_k");
  require_positive(nu, "bessel_k");
  const int nl = static_cast<int>(std::floor(nu + 0.5));
  const double mu = nu - nl;  // in [-1/2, 1/2]
  double k_mu, k_mup1;
  if (x <= 2.0) {
    bessel_k_temme(mu, x, k_mu, k_mup1);
  } else {
    bessel_k_cf2(mu, x, k_mu, k_mup1);
  }
  // upward recurrence K_{m+1} = K_{m-1} + (2m/x) K_m, stable for K
  for (int l = 1; l <= nl; ++l) {
    const double k_next = k_mu + (2.0 * (mu + l) / x) * k_mup1;
    k_mu = k_mup1;
    k_mup1 = k_next;
  }
  return k_mu;
}

double bessel_k(double nu, double x) {
  require_positive(x, "bessel_k");
  require_positive(nu, "bessel_k");
  const double half_offset = nu - std::floor(nu) - 0.5;
  if (std::abs(half_offset) < 1e-13) {
    return bessel_k_half_integer(static_cast<int>(std::floor(nu)), x);
  }
  return bessel_k_general(nu, x);
}

double logistic(double x) {
  // Complement form keeps logistic(x) + logistic(-x) == 1 exact
  // (1 - p is exact by Sterbenz for p in [1/2, 1]).
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  return 1.0 - 1.0 / (1.0 + std::exp(x));
}

double log_logistic(double x) {
  if (x >= 0.0) return -std::log1p(std::exp(-x));
  return x - std::log1p(std::exp(x));
}

double log_sum_exp(std::span<const double> values) {
  if (values.empty()) throw std::invalid_argument("log_sum_exp: empty input");
  const double m = *std::max_element(values.begin(), values.end());
  if (!std::isfinite(m)) return m;  // all -inf (or a +inf/nan dominates)
  double s = 0.0;
  for (double v : values) s += std::exp(v - m);
  return m + std::log(s);
}

}  // namespace logibeta
