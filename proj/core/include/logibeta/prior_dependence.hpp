#ifndef LOGIBETA_PRIOR_DEPENDENCE_HPP
#define LOGIBETA_PRIOR_DEPENDENCE_HPP

// Prior-dependence calculators for the LB-DDP: the tie probability and
// random-probability-measure correlation, their Monte Carlo ingredient
// mu(x,x'), the competitor lower bounds (M1-M4) and the diagonal-continuity
// harness.

#include <cstdint>
#include <vector>

#include "logibeta/kernels.hpp"
#include "logibeta/polya.hpp"

namespace logibeta {

struct MonteCarloEstimate {
  double value = 0.0;
  double se = 0.0;
  long nsim = 0;
};

// mu(x,x') = E[sigma(eta(x)) sigma(eta(x'))] with eta ~ LBP(a,b,kernel),
// by Monte Carlo over (lambda, bivariate normal) draws.
MonteCarloEstimate mu_mc(const CorrelationKernel& kernel, const Eigen::RowVectorXd& x,
                         const Eigen::RowVectorXd& x2, const ShapePair& shape, long nsim,
                         std::uint64_t seed, int polya_truncation = kDefaultPolyaTruncation);

// Same with a directly supplied pair correlation R(x,x') = r12.
MonteCarloEstimate mu_mc_corr(double r12, const ShapePair& shape, long nsim, std::uint64_t seed,
                              int polya_truncation = kDefaultPolyaTruncation);

// Exact mu at x = x': the second moment of Beta(1,b), 2/{(1+b)(2+b)}.
double mu_diagonal(double b);

// Stick-ratio correlation corr{V(x), V(x')} from the same Monte Carlo.
MonteCarloEstimate stick_corr_mc(double r12, const ShapePair& shape, long nsim,
                                 std::uint64_t seed,
                                 int polya_truncation = kDefaultPolyaTruncation);

// pr(theta = theta' | G_x, G_x') = (1+b) / {2 mu^{-1} - (1+b)}.
// Domain: 0 < mu < 2/(1+b).
double tie_probability(double mu, double b);

// corr{G_x(B), G_x'(B)} = rho0 (1+b)^2 / {2 mu^{-1} - (1+b)}.
double corr_rpm(double mu, double b, double rho0 = 1.0);

// Greatest lower bounds of the stick-ratio correlation and the RPM
// correlation for the four single-atoms constructions. M2 and M3 are
// closed forms; M1 and M4 carry Monte Carlo standard errors.
struct CompetitorBounds {
  MonteCarloEstimate m1_stick_corr;
  MonteCarloEstimate m1_rpm;
  double m2_stick_corr = 0.0;
  double m2_rpm = 0.0;
  double m3_stick_corr = 0.0;  // independent stick ratios
  double m3_rpm = 0.0;         // (1+b)/(1+2b)
  MonteCarloEstimate m4_stick_corr;
  MonteCarloEstimate m4_rpm;
};

CompetitorBounds competitor_corr_bounds(double b, long mc_nsim, std::uint64_t seed);

// corr_rpm(mu_mc(...)) along a sequence of distances shrinking to zero.
// Common random numbers across distances keep the estimated sequence
// monotone when the true sequence is.
std::vector<MonteCarloEstimate> continuity_check(const CorrelationKernel& kernel, double b,
                                                 const std::vector<double>& distances, long nsim,
                                                 std::uint64_t seed,
                                                 int polya_truncation = kDefaultPolyaTruncation);

}  // namespace logibeta

#endif
