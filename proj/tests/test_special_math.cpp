#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include "doctest.h"
#include "logibeta/special_math.hpp"
#include "stat_tests.hpp"

using namespace logibeta;

namespace {

constexpr double kEuler = 0.57721566490153286061;

// Truncated-series oracle psi(x) = -gamma + sum_{k>=0} {1/(k+1) - 1/(k+x)},
// with the tail replaced by the midpoint of its integral bracket
// (x-1) / (K + c): error O((x-1)^2/K^2).
double digamma_series_oracle(double x, long terms = 10'000'000) {
  double sum = 0.0;
  for (long k = terms - 1; k >= 0; --k) sum += 1.0 / (k + 1.0) - 1.0 / (k + x);
  const double c_lo = std::min(1.0, x), c_hi = std::max(1.0, x);
  const double tail = 0.5 * ((x - 1.0) / (terms + c_lo) + (x - 1.0) / (terms + c_hi));
  return -kEuler + sum + tail;
}

// psi'(x) = sum_{k>=0} (x+k)^{-2}; integral-bracket midpoint tail.
double trigamma_series_oracle(double x, long terms = 3'000'000) {
  double sum = 0.0;
  for (long k = terms - 1; k >= 0; --k) {
    const double t = x + k;
    sum += 1.0 / (t * t);
  }
  const double tail = 0.5 * (1.0 / (x + terms - 1.0) + 1.0 / (x + terms));
  return sum + tail;
}

// psi'''(x) = 6 sum (x+k)^{-4}; tail below 1e-14 at 1e5 terms.
double polygamma3_series_oracle(double x, long terms = 200'000) {
  double sum = 0.0;
  for (long k = terms - 1; k >= 0; --k) {
    const double t = x + k;
    sum += 1.0 / (t * t * t * t);
  }
  const double e = x + terms - 0.5;
  return 6.0 * sum + 2.0 / (e * e * e);
}

// Half-integer closed forms for K_{n+1/2}.
double bessel_k_half(int n, double x) {
  const double base = std::sqrt(std::numbers::pi / (2.0 * x)) * std::exp(-x);
  if (n == 0) return base;
  if (n == 1) return base * (1.0 + 1.0 / x);
  if (n == 2) return base * (1.0 + 3.0 / x + 3.0 / (x * x));
  FAIL("unsupported order");
  return 0.0;
}

}  // namespace

TEST_CASE("digamma matches the truncated-series oracle") {
  CHECK(digamma(1.0) == doctest::Approx(-kEuler).epsilon(1e-13));
  CHECK(digamma(1.0) == doctest::Approx(digamma_series_oracle(1.0)).epsilon(1e-11));
  CHECK(digamma(0.5) == doctest::Approx(-kEuler - 2.0 * std::log(2.0)).epsilon(1e-13));
  CHECK(digamma(0.5) == doctest::Approx(digamma_series_oracle(0.5)).epsilon(1e-11));
  CHECK(digamma(2.0) == doctest::Approx(digamma(1.0) + 1.0).epsilon(1e-14));
  CHECK(digamma(3.7) == doctest::Approx(digamma_series_oracle(3.7)).epsilon(1e-11));
  CHECK_THROWS_AS(digamma(0.0), std::domain_error);
  CHECK_THROWS_AS(digamma(-1.0), std::domain_error);
}

TEST_CASE("trigamma matches series oracle and closed values") {
  const double pi2 = std::numbers::pi * std::numbers::pi;
  CHECK(trigamma(1.0) == doctest::Approx(pi2 / 6.0).epsilon(1e-13));
  CHECK(trigamma(0.5) == doctest::Approx(pi2 / 2.0).epsilon(1e-13));
  CHECK(trigamma(2.0) == doctest::Approx(pi2 / 6.0 - 1.0).epsilon(1e-13));
  CHECK(trigamma(1.0) == doctest::Approx(trigamma_series_oracle(1.0)).epsilon(1e-12));
  CHECK(trigamma(4.2) == doctest::Approx(trigamma_series_oracle(4.2)).epsilon(1e-12));
  CHECK_THROWS_AS(trigamma(-0.5), std::domain_error);
}

TEST_CASE("polygamma3 matches series oracle and closed values") {
  const double pi4 = std::pow(std::numbers::pi, 4);
  CHECK(polygamma3(1.0) == doctest::Approx(pi4 / 15.0).epsilon(1e-13));
  CHECK(polygamma3(2.0) == doctest::Approx(pi4 / 15.0 - 6.0).epsilon(1e-12));
  CHECK(polygamma3(10.0) == doctest::Approx(polygamma3_series_oracle(10.0)).epsilon(1e-13));
  CHECK(polygamma3(10.0) == doctest::Approx(0.0022829).epsilon(1e-4));
  CHECK(polygamma3(0.3) == doctest::Approx(polygamma3_series_oracle(0.3)).epsilon(1e-12));
  CHECK_THROWS_AS(polygamma3(0.0), std::domain_error);
}

TEST_CASE("polygamma recurrences hold on the grid") {
  for (double x : {0.1, 0.5, 1.0, 2.0, 5.0, 10.0, 100.0}) {
    CHECK(digamma(x + 1.0) - digamma(x) == doctest::Approx(1.0 / x).epsilon(1e-10));
    CHECK(trigamma(x + 1.0) - trigamma(x) == doctest::Approx(-1.0 / (x * x)).epsilon(1e-10));
    CHECK(polygamma3(x + 1.0) - polygamma3(x) ==
          doctest::Approx(-6.0 / (x * x * x * x)).epsilon(1e-10));
  }
}

TEST_CASE("log_beta closed forms, symmetry and digamma derivative") {
  CHECK(log_beta(1.0, 1.0) == doctest::Approx(0.0).epsilon(1e-15));
  // B(2,4) = 1! 3! / 5! = 6/120 = 1/20
  CHECK(log_beta(2.0, 4.0) == doctest::Approx(std::log(1.0 / 20.0)).epsilon(1e-13));
  for (auto [a, b] : std::vector<std::pair<double, double>>{{0.3, 2.0}, {1.5, 7.2}, {4.0, 4.0}}) {
    CHECK(log_beta(a, b) == doctest::Approx(log_beta(b, a)).epsilon(1e-15));
    // d/da ln B(a,b) = psi(a) - psi(a+b), central differences
    const double h = 1e-5;
    const double fd = (log_beta(a + h, b) - log_beta(a - h, b)) / (2.0 * h);
    CHECK(fd == doctest::Approx(digamma(a) - digamma(a + b)).epsilon(1e-6));
  }
  CHECK_THROWS_AS(log_beta(0.0, 1.0), std::domain_error);
}

TEST_CASE("bessel_k half-integer closed forms on both routes") {
  CHECK(bessel_k(0.5, 1.0) ==
        doctest::Approx(std::sqrt(std::numbers::pi / 2.0) * std::exp(-1.0)).epsilon(1e-12));
  CHECK(bessel_k(1.5, 1.0) ==
        doctest::Approx(2.0 * std::sqrt(std::numbers::pi / 2.0) * std::exp(-1.0)).epsilon(1e-12));
  for (double x = 0.01; x <= 20.0; x *= 1.9) {
    for (int n = 0; n <= 2; ++n) {
      const double closed = bessel_k_half(n, x);
      CHECK(bessel_k(n + 0.5, x) == doctest::Approx(closed).epsilon(1e-10));
      CHECK(bessel_k_general(n + 0.5, x) == doctest::Approx(closed).epsilon(1e-10));
    }
  }
}

TEST_CASE("bessel_k general orders against the integral representation") {
  // K_nu(x) = int_0^inf exp(-x cosh t) cosh(nu t) dt
  for (auto [nu, x] : std::vector<std::pair<double, double>>{
           {0.25, 0.7}, {1.0, 1.3}, {2.2, 3.0}, {4.7, 8.0}}) {
    const double ref = testsup::integrate(
        [nu = nu, x = x](double t) { return std::exp(-x * std::cosh(t)) * std::cosh(nu * t); },
        0.0, 30.0, 1e-13);
    CHECK(bessel_k(nu, x) == doctest::Approx(ref).epsilon(1e-9));
  }
}

TEST_CASE("bessel_k is decreasing in x and errors on bad input") {
  for (double nu : {0.25, 0.5, 1.0, 1.5, 2.5, 5.0}) {
    CHECK(bessel_k(nu, 2.0) < bessel_k(nu, 1.0));
  }
  CHECK_THROWS_AS(bessel_k(1.0, 0.0), std::domain_error);
  CHECK_THROWS_AS(bessel_k(0.0, 1.0), std::domain_error);
  // near the origin the value is large but finite
  CHECK(bessel_k(5.0, 1e-6) > 1e30);
  CHECK(std::isfinite(bessel_k(5.0, 1e-6)));
}

TEST_CASE("logistic is stable and exactly complementary") {
  CHECK(logistic(0.0) == 0.5);
  CHECK(logistic(40.0) == doctest::Approx(1.0 - std::exp(-40.0)).epsilon(1e-15));
  CHECK(logistic(700.0) == 1.0);
  CHECK(logistic(-700.0) >= 0.0);
  for (double x = 0.0; x <= 30.0; x += 0.37) {
    CHECK(logistic(x) + logistic(-x) == 1.0);  // exact in floating point
  }
  CHECK(log_logistic(0.0) == doctest::Approx(std::log(0.5)));
  CHECK(log_logistic(-500.0) == doctest::Approx(-500.0).epsilon(1e-12));
}

TEST_CASE("log_sum_exp shift invariance and edge cases") {
  const std::vector<double> zeros{0.0, 0.0};
  CHECK(log_sum_exp(zeros) == doctest::Approx(std::log(2.0)).epsilon(1e-15));
  const std::vector<double> big{1000.0, 1000.0};
  CHECK(log_sum_exp(big) == doctest::Approx(1000.0 + std::log(2.0)).epsilon(1e-15));
  const std::vector<double> with_ninf{0.0, -std::numeric_limits<double>::infinity()};
  CHECK(log_sum_exp(with_ninf) == doctest::Approx(0.0));
  CHECK_THROWS_AS(log_sum_exp(std::vector<double>{}), std::invalid_argument);
}
