#pragma once

#include <boost/math/special_functions/erf.hpp>

#include <cmath>
#include <cstdint>
#include <vector>

namespace unimax::detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// Uniform double in [0, 1) from a hashed counter.
inline double hashed_unit(std::uint64_t seed, std::uint64_t stream) {
  return static_cast<double>(splitmix64(seed * 0x100000001B3ULL + stream) >> 11) * 0x1.0p-53;
}

// Base-2 radical inverse.
inline double van_der_corput(std::uint64_t i) {
  double q = 0.0;
  double bk = 0.5;
  while (i > 0) {
    if (i & 1U) q += bk;
    i >>= 1U;
    bk *= 0.5;
  }
  return q;
}

// Additive-recurrence (Kronecker) generators for dimension d: alpha_j = phi^-(j+1)
// where phi is the positive root of x^(d+1) = x + 1.
inline std::vector<double> kronecker_alphas(std::size_t d) {
  double phi = 2.0;
  for (int it = 0; it < 64; ++it) {
    const double f = std::pow(phi, static_cast<double>(d + 1)) - phi - 1.0;
    const double df = static_cast<double>(d + 1) * std::pow(phi, static_cast<double>(d)) - 1.0;
    phi -= f / df;
  }
  std::vector<double> alphas(d);
  double p = 1.0;
  for (std::size_t j = 0; j < d; ++j) {
    p /= phi;
    alphas[j] = p - std::floor(p);
  }
  return alphas;
}

inline double frac(double x) { return x - std::floor(x); }

// Standard normal quantile.
inline double normal_quantile(double u) {
  constexpr double kLo = 1e-300;
  if (u <= 0.0) u = kLo;
  if (u >= 1.0) u = std::nextafter(1.0, 0.0);
  return std::sqrt(2.0) * boost::math::erf_inv(2.0 * u - 1.0);
}

}  // namespace unimax::detail
