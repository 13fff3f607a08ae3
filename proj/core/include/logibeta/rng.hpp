#ifndef LOGIBETA_RNG_HPP
#define LOGIBETA_RNG_HPP

// Seedable random source plus the scalar samplers used across the library.
// Samplers are hand-rolled (no std::*_distribution) so that seeded runs
// produce the same streams on any platform with IEEE doubles.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace logibeta {

using Rng = std::mt19937_64;

// splitmix64 finalizer, used to derive independent stream seeds.
inline std::uint64_t mix_seed(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Deterministic sub-stream seed from (master seed, index, sub-index).
inline std::uint64_t derive_stream(std::uint64_t seed, std::uint64_t i, std::uint64_t j = 0) {
  return mix_seed(mix_seed(seed + 0x632be59bd9b4e019ULL * (i + 1)) ^ (j + 1));
}

// Uniform on the open interval (0,1); never returns 0 or 1.
inline double runif(Rng& rng) {
  return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
}

inline double rexp(Rng& rng) { return -std::log(runif(rng)); }

// Box-Muller without caching the paired variate.
inline double rnorm(Rng& rng) {
  const double u1 = runif(rng);
  const double u2 = runif(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

// Marsaglia-Tsang gamma generator; returns Ga(shape, rate).
inline double rgamma(Rng& rng, double shape, double rate = 1.0) {
  if (shape < 1.0) {
    const double u = runif(rng);
    return rgamma(rng, shape + 1.0, rate) * std::pow(u, 1.0 / shape);
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  while (true) {
    double x, v;
    do {
      x = rnorm(rng);
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = runif(rng);
    if (std::log(u) < 0.5 * x * x + d - d * v + d * std::log(v)) return d * v / rate;
  }
}

}  // namespace logibeta

#endif
