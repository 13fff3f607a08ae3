#ifndef LOGIBETA_SPECIAL_MATH_HPP
#define LOGIBETA_SPECIAL_MATH_HPP

// Special functions and numerically stable scalar primitives used
// throughout the library. All functions are pure and thread-safe.

#include <span>

namespace logibeta {

// psi(x) for x > 0, absolute error below 1e-12 on [1e-3, 1e6].
// Throws std::domain_error for x <= 0.
double digamma(double x);

// psi'(x) for x > 0.
double trigamma(double x);

// psi'''(x) = 6 * sum_{k>=0} (x+k)^-4 for x > 0.
double polygamma3(double x);

// ln B(a,b) for a, b > 0.
double log_beta(double a, double b);

// Modified Bessel function of the second kind K_nu(x), nu > 0, x > 0.
// Half-integer orders short-circuit to the closed-form finite sum.
// As x -> 0 the value grows like Gamma(nu) (2/x)^nu / 2; it is returned
// as a (possibly very large) finite double and becomes +inf only when
// the result exceeds the double range. No overflow error is thrown.
double bessel_k(double nu, double x);

// General-path K_nu(x) without the half-integer shortcut (Temme series
// for x <= 2, Steed continued fraction beyond). Exposed so the two
// routes can be cross-checked.
double bessel_k_general(double nu, double x);

// sigma(x) = 1/(1+exp(-x)). Stable for |x| up to 700; satisfies
// logistic(x) + logistic(-x) == 1 exactly in floating point.
double logistic(double x);

// ln sigma(x), stable for large |x|.
double log_logistic(double x);

// ln sum_i exp(v_i) without overflow. -inf entries are ignored;
// an empty input throws std::invalid_argument.
double log_sum_exp(std::span<const double> values);

}  // namespace logibeta

#endif
