#ifndef LOGIBETA_POLYA_HPP
#define LOGIBETA_POLYA_HPP

// The Polya mixing distribution (sampling, density, identity, moments)
// and the exact Polya-Gamma PG(1, c) rejection sampler.

#include "logibeta/rng.hpp"

namespace logibeta {

// Shape parameters (a, b) shared by the Polya, logistic-beta and
// logistic-beta-process families.
struct ShapePair {
  double a = 1.0;
  double b = 1.0;
};

// Throws std::invalid_argument unless a > 0 and b > 0.
void validate_shape(const ShapePair& shape);

struct PolyaDraw {
  double lambda = 0.0;
  int truncation_terms = 0;
};

// Truncated-sum draw: sum_{k<K} 2 eps_k / {(k+a)(k+b)} plus the exact
// tail mean 2{psi(K+a)-psi(K+b)}/(a-b)  (2 psi'(K+m) with m=(a+b)/2 when
// |a-b| < 1e-9), which keeps the draw unbiased in mean. Always > 0.
PolyaDraw sample_polya(const ShapePair& shape, int truncation, Rng& rng);

inline constexpr int kDefaultPolyaTruncation = 200;

struct PolyaLogDensityResult {
  double log_density = 0.0;
  bool converged = false;
  int terms_used = 0;
};

// Log density via the alternating series, accumulated in extended
// precision against the running maximum term. Stops once terms decay
// below tol relative to the partial sum; reports converged = false when
// the term budget (1e4) is exhausted or cancellation destroys the sum
// (small-lambda regime).
PolyaLogDensityResult polya_log_density(double lambda, const ShapePair& shape, double tol = 1e-12);

// ln[ pi_PO(lambda; to) / pi_PO(lambda; from) ] for pairs with equal
// shape sums: ln B(from) - ln B(to) + lambda (from.a from.b - to.a to.b)/2.
// No series evaluation. Throws if |from.a+from.b - to.a-to.b| > 1e-12.
double polya_identity_log_factor(double lambda, const ShapePair& from, const ShapePair& to);

struct PolyaMoments {
  double mean = 0.0;
  double variance = 0.0;
};

// Closed-form mean/variance; the a=b branch is taken when |a-b| < 1e-9.
PolyaMoments polya_moments(const ShapePair& shape);

// Exact draw from PG(1, c) via the alternating-series rejection sampler.
double sample_polya_gamma_1(double c, Rng& rng);

}  // namespace logibeta

#endif
