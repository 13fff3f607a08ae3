#ifndef LOGIBETA_TESTS_SIMULATORS_HPP
#define LOGIBETA_TESTS_SIMULATORS_HPP

// Brute-force stick-breaking simulators. These are the independent oracles
// for the tie-probability and RPM-correlation formulas; they never call the
// closed forms they are used to verify.

#include <cmath>
#include <vector>

#include "logibeta/polya.hpp"
#include "logibeta/special_math.hpp"

namespace testsup {

struct TieSimResult {
  double estimate = 0.0;
  double se = 0.0;
  long nsim = 0;
};

// Draw one stick pair (V, V') from logistic-transformed LB(1,b) with pair
// correlation r12 in the latent Gaussian.
inline std::pair<double, double> draw_stick_pair(double r12, double b, logibeta::Rng& rng,
                                                 int polya_truncation) {
  const logibeta::ShapePair shape{1.0, b};
  const double lambda = logibeta::sample_polya(shape, polya_truncation, rng).lambda;
  const double s = std::sqrt(lambda);
  const double ms = 0.5 * (shape.a - shape.b);
  const double z1 = logibeta::rnorm(rng);
  const double z2 = logibeta::rnorm(rng);
  const double root = std::sqrt(std::max(0.0, 1.0 - r12 * r12));
  return {logibeta::logistic(ms * lambda + s * z1),
          logibeta::logistic(ms * lambda + s * (r12 * z1 + root * z2))};
}

// Tie probability by direct co-selection: walk the stick-breaking levels
// lazily (capped at `truncation` levels) and draw one index from each of
// G_x and G_x', sharing the level sticks; count index agreement.
inline TieSimResult simulate_tie_probability(double r12, double b, long nsim,
                                             std::uint64_t seed, int truncation = 200,
                                             int polya_truncation = 200) {
  logibeta::Rng rng(seed);
  long ties = 0;
  for (long t = 0; t < nsim; ++t) {
    int pick1 = -1, pick2 = -1;
    for (int h = 0; h < truncation && (pick1 < 0 || pick2 < 0); ++h) {
      const bool last = (h + 1 == truncation);
      double v1 = 1.0, v2 = 1.0;
      if (!last) {
        const auto [a1, a2] = draw_stick_pair(r12, b, rng, polya_truncation);
        v1 = a1;
        v2 = a2;
      }
      if (pick1 < 0 && logibeta::runif(rng) < v1) pick1 = h;
      if (pick2 < 0 && logibeta::runif(rng) < v2) pick2 = h;
    }
    if (pick1 == pick2) ++ties;
  }
  const double p = static_cast<double>(ties) / nsim;
  return {p, std::sqrt(p * (1.0 - p) / nsim), nsim};
}

// corr{G_x(B), G_x'(B)} by simulating weight vectors against shared
// standard-normal atoms, with B = (-inf, 0] (the base-measure median).
// Levels whose joint remaining mass is negligible are skipped.
inline TieSimResult simulate_rpm_correlation(double r12, double b, long nsim,
                                             std::uint64_t seed, int truncation = 200,
                                             int polya_truncation = 200) {
  logibeta::Rng rng(seed);
  double s1 = 0, s2 = 0, s11 = 0, s22 = 0, s12 = 0;
  std::vector<double> g1v(nsim), g2v(nsim);
  for (long t = 0; t < nsim; ++t) {
    double rem1 = 1.0, rem2 = 1.0;
    double g1 = 0.0, g2 = 0.0;
    for (int h = 0; h < truncation; ++h) {
      const bool last = (h + 1 == truncation);
      double v1 = 1.0, v2 = 1.0;
      if (!last) {
        const auto [a1, a2] = draw_stick_pair(r12, b, rng, polya_truncation);
        v1 = a1;
        v2 = a2;
      }
      const bool atom_in_b = logibeta::rnorm(rng) <= 0.0;
      if (atom_in_b) {
        g1 += rem1 * v1;
        g2 += rem2 * v2;
      }
      rem1 *= (1.0 - v1);
      rem2 *= (1.0 - v2);
      if (last || (rem1 < 1e-12 && rem2 < 1e-12)) break;
    }
    g1v[t] = g1;
    g2v[t] = g2;
    s1 += g1;
    s2 += g2;
    s11 += g1 * g1;
    s22 += g2 * g2;
    s12 += g1 * g2;
  }
  const double m1 = s1 / nsim, m2 = s2 / nsim;
  const double var1 = s11 / nsim - m1 * m1;
  const double var2 = s22 / nsim - m2 * m2;
  const double cov = s12 / nsim - m1 * m2;
  const double c = cov / std::sqrt(var1 * var2);
  return {c, (1.0 - c * c) / std::sqrt(static_cast<double>(nsim)), nsim};
}

}  // namespace testsup

#endif
