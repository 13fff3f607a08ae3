#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "doctest.h"
#include "logibeta/polya.hpp"
#include "logibeta/special_math.hpp"
#include "stat_tests.hpp"

using namespace logibeta;

namespace {

std::vector<double> polya_draws(const ShapePair& shape, long n, std::uint64_t seed,
                                int truncation = kDefaultPolyaTruncation) {
  Rng rng(seed);
  std::vector<double> out(n);
  for (long i = 0; i < n; ++i) out[i] = sample_polya(shape, truncation, rng).lambda;
  return out;
}

}  // namespace

TEST_CASE("sample_polya matches the closed-form means") {
  const double pi2 = std::numbers::pi * std::numbers::pi;
  {
    const auto s = testsup::summarize(polya_draws({1.0, 1.0}, 100000, 11));
    CHECK(std::abs(s.mean - pi2 / 3.0) < 3.0 * s.se_mean);  // E = 2 psi'(1)
  }
  {
    const auto s = testsup::summarize(polya_draws({1.0, 2.0}, 100000, 12));
    CHECK(std::abs(s.mean - 2.0) < 3.0 * s.se_mean);  // 2{psi(1)-psi(2)}/(1-2)
  }
  Rng rng(5);
  for (int i = 0; i < 2000; ++i) {
    CHECK(sample_polya({0.5, 3.0}, 50, rng).lambda > 0.0);
  }
  CHECK_THROWS_AS(sample_polya({1.0, 1.0}, 0, rng), std::invalid_argument);
  CHECK_THROWS_AS(sample_polya({-1.0, 1.0}, 10, rng), std::invalid_argument);
}

TEST_CASE("polya_log_density integrates to one and is symmetric") {
  const double integral = testsup::integrate(
      [](double lam) {
        const auto r = polya_log_density(lam, {1.0, 1.0}, 1e-13);
        return r.converged ? std::exp(r.log_density) : 0.0;
      },
      0.05, 60.0, 1e-8);
  CHECK(integral == doctest::Approx(1.0).epsilon(1e-3));

  for (double lam : {0.5, 1.0, 3.0, 10.0}) {
    const auto a = polya_log_density(lam, {1.0, 3.0});
    const auto b = polya_log_density(lam, {3.0, 1.0});
    REQUIRE(a.converged);
    CHECK(a.log_density == b.log_density);  // the series is symmetric in (a,b)
  }
}

TEST_CASE("density ratio across fixed-sum pairs matches the closed factor") {
  // ratio pi(lambda; 2,2)/pi(lambda; 1,3) at lambda = 2 equals
  // B(1,3)/B(2,2) exp(lambda (1*3-2*2)/2) = 2 e^{-1}
  const auto d13 = polya_log_density(2.0, {1.0, 3.0}, 1e-13);
  const auto d22 = polya_log_density(2.0, {2.0, 2.0}, 1e-13);
  REQUIRE(d13.converged);
  REQUIRE(d22.converged);
  CHECK(std::exp(d22.log_density - d13.log_density) ==
        doctest::Approx(2.0 * std::exp(-1.0)).epsilon(1e-9));
}

TEST_CASE("polya_log_density reports non-convergence near the origin") {
  const auto r = polya_log_density(1e-6, {1.0, 1.0});
  CHECK_FALSE(r.converged);
}

TEST_CASE("polya_identity_log_factor closed form") {
  CHECK(polya_identity_log_factor(3.0, {1.0, 3.0}, {1.0, 3.0}) == 0.0);
  CHECK(polya_identity_log_factor(2.0, {1.0, 3.0}, {2.0, 2.0}) ==
        doctest::Approx(std::log(2.0) - 1.0).epsilon(1e-12));
  // inverse consistency
  Rng rng(42);
  for (int t = 0; t < 50; ++t) {
    const double c = 1.0 + 5.0 * runif(rng);
    const double a1 = 0.1 * c + 0.8 * c * runif(rng);
    const double a2 = 0.1 * c + 0.8 * c * runif(rng);
    const ShapePair pp{a1, c - a1};
    const ShapePair qq{a2, c - a2};
    const double lam = 0.5 + 9.5 * runif(rng);
    CHECK(polya_identity_log_factor(lam, pp, qq) + polya_identity_log_factor(lam, qq, pp) ==
          doctest::Approx(0.0).epsilon(1e-12));
  }
  CHECK_THROWS_AS(polya_identity_log_factor(1.0, {1.0, 2.0}, {1.0, 3.0}), std::invalid_argument);
}

TEST_CASE("identity property links two series evaluations") {
  Rng rng(99);
  int checked = 0;
  for (int t = 0; t < 80 && checked < 50; ++t) {
    const double c = 2.0 + 3.0 * runif(rng);
    const double a1 = 0.2 * c + 0.6 * c * runif(rng);
    const double a2 = 0.2 * c + 0.6 * c * runif(rng);
    const ShapePair p{a1, c - a1}, q{a2, c - a2};
    const double lam = 0.5 + 9.5 * runif(rng);
    const auto dp = polya_log_density(lam, p, 1e-13);
    const auto dq = polya_log_density(lam, q, 1e-13);
    if (!dp.converged || !dq.converged) continue;
    ++checked;
    CHECK(std::abs(dq.log_density - dp.log_density - polya_identity_log_factor(lam, p, q)) <
          1e-6);
  }
  CHECK(checked == 50);
}

TEST_CASE("polya_moments closed forms and symmetry") {
  const double pi2 = std::numbers::pi * std::numbers::pi;
  const double pi4 = pi2 * pi2;
  {
    const auto m = polya_moments({1.0, 1.0});
    CHECK(m.mean == doctest::Approx(pi2 / 3.0).epsilon(1e-12));
    CHECK(m.variance == doctest::Approx(2.0 * pi4 / 45.0).epsilon(1e-12));
  }
  {
    const auto m = polya_moments({1.0, 2.0});
    CHECK(m.mean == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(m.variance == doctest::Approx(4.0 * (pi2 / 3.0 - 3.0)).epsilon(1e-10));
  }
  for (auto [a, b] : std::vector<std::pair<double, double>>{{1.0, 2.0}, {0.3, 4.0}, {2.0, 2.0}}) {
    const auto m1 = polya_moments({a, b});
    const auto m2 = polya_moments({b, a});
    CHECK(m1.mean == doctest::Approx(m2.mean).epsilon(1e-13));
    CHECK(m1.variance == doctest::Approx(m2.variance).epsilon(1e-13));
  }
}

TEST_CASE("sampler moments match polya_moments within 4 MC SEs") {
  std::uint64_t seed = 1000;
  for (auto [a, b] : std::vector<std::pair<double, double>>{
           {1.0, 1.0}, {1.0, 2.0}, {2.0, 4.0}, {0.5, 0.5}}) {
    const auto s = testsup::summarize(polya_draws({a, b}, 100000, seed++));
    const auto m = polya_moments({a, b});
    CHECK(std::abs(s.mean - m.mean) < 4.0 * s.se_mean);
    CHECK(std::abs(s.variance - m.variance) < 4.0 * s.se_var);
  }
  // (1,2) variance against a larger truncated-sum sample
  const auto big = testsup::summarize(polya_draws({1.0, 2.0}, 1000000, 77));
  const auto m12 = polya_moments({1.0, 2.0});
  CHECK(std::abs(big.variance - m12.variance) < 4.0 * big.se_var);
}

TEST_CASE("truncated-sum draws pass a chi-square test against the density") {
  // 20 equal-probability bins from the quadrature CDF of Polya(1,1)
  const ShapePair shape{1.0, 1.0};
  auto pdf = [&](double lam) {
    const auto r = polya_log_density(lam, shape, 1e-13);
    return r.converged ? std::exp(r.log_density) : 0.0;
  };
  // cumulative table on a fine grid, then invert for the bin edges
  const double lo = 0.02, hi = 100.0;
  const int m = 8000;
  std::vector<double> grid(m + 1), cdf(m + 1);
  const double h = (hi - lo) / m;
  grid[0] = lo;
  cdf[0] = 0.0;
  for (int i = 1; i <= m; ++i) {
    grid[i] = lo + i * h;
    cdf[i] = cdf[i - 1] + 0.5 * h * (pdf(grid[i - 1]) + pdf(grid[i]));
  }
  const double total = cdf[m];
  // interior bin edges near the k/20 quantiles; expected counts come from
  // the quadrature CDF evaluated at the edges actually used
  std::vector<double> edges, edge_cdf;
  for (int k = 1; k < 20; ++k) {
    const double target = total * k / 20.0;
    const auto it = std::lower_bound(cdf.begin(), cdf.end(), target);
    const auto idx = static_cast<std::size_t>(it - cdf.begin());
    edges.push_back(grid[idx]);
    edge_cdf.push_back(cdf[idx]);
  }
  const long n = 100000;
  std::vector<long> counts(20, 0);
  Rng rng(2024);
  for (long i = 0; i < n; ++i) {
    const double lam = sample_polya(shape, kDefaultPolyaTruncation, rng).lambda;
    const auto it = std::upper_bound(edges.begin(), edges.end(), lam);
    counts[static_cast<std::size_t>(it - edges.begin())] += 1;
  }
  std::vector<double> expected(20);
  for (int k = 0; k < 20; ++k) {
    const double lo = k == 0 ? 0.0 : edge_cdf[k - 1];
    const double hi = k == 19 ? total : edge_cdf[k];
    expected[k] = n * (hi - lo) / total;
  }
  CHECK(testsup::chi2_test(counts, expected) > 0.01);
}

TEST_CASE("PG(1,c) moments and symmetry") {
  Rng rng(31);
  {
    std::vector<double> w(100000);
    for (auto& v : w) v = sample_polya_gamma_1(0.0, rng);
    const auto s = testsup::summarize(w);
    CHECK(std::abs(s.mean - 0.25) < 3.0 * s.se_mean);
  }
  {
    std::vector<double> w(100000);
    for (auto& v : w) v = sample_polya_gamma_1(2.0, rng);
    const auto s = testsup::summarize(w);
    CHECK(std::abs(s.mean - std::tanh(1.0) / 4.0) < 3.0 * s.se_mean);
  }
  {
    std::vector<double> wp(100000), wm(100000);
    for (auto& v : wp) v = sample_polya_gamma_1(1.7, rng);
    for (auto& v : wm) v = sample_polya_gamma_1(-1.7, rng);
    CHECK(testsup::ks_test_two_sample(wp, wm) > 0.01);
  }
}

TEST_CASE("4 pi^2 PG(1,0) is Polya(1/2,1/2) in distribution") {
  const double scale = 4.0 * std::numbers::pi * std::numbers::pi;
  Rng rng(8);
  const long n = 100000;
  std::vector<double> pg(n), po(n);
  for (auto& v : pg) v = scale * sample_polya_gamma_1(0.0, rng);
  for (auto& v : po) v = sample_polya({0.5, 0.5}, kDefaultPolyaTruncation, rng).lambda;
  CHECK(testsup::ks_test_two_sample(pg, po) > 0.01);
}
