#pragma once

#include "unimax/detail/sequences.hpp"
#include "unimax/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace unimax {

using Vector = std::vector<double>;

inline double dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw DimensionMismatch("dot: length mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

// Euclidean norm, scaled so that tiny and huge entries neither underflow nor
// overflow.
inline double norm2(std::span<const double> a) {
  double scale = 0.0;
  for (double x : a) scale = std::max(scale, std::abs(x));
  if (scale == 0.0 || !std::isfinite(scale)) return scale;
  double s = 0.0;
  for (double x : a) {
    const double y = x / scale;
    s += y * y;
  }
  return scale * std::sqrt(s);
}

inline double distance(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw DimensionMismatch("distance: length mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return std::sqrt(s);
}

// Point of the unit sphere S^{n-1}, n >= 2.
class UnitVector {
 public:
  static constexpr double kNormTolerance = 1e-12;

  // Validates that coords already has unit length.
  static UnitVector from_coords(Vector coords) {
    if (coords.size() < 2) throw InvalidDimension("unit vector needs dimension >= 2");
    const double n = norm2(coords);
    if (!(std::abs(n - 1.0) <= kNormTolerance)) {
      throw NotUnitLength("coordinates do not have unit length (norm " + std::to_string(n) + ")");
    }
    return UnitVector(std::move(coords));
  }

  std::span<const double> coords() const noexcept { return coords_; }
  const Vector& vector() const noexcept { return coords_; }
  std::size_t dimension() const noexcept { return coords_.size(); }
  double operator[](std::size_t i) const { return coords_[i]; }

  // Exact negation; antipodes are never recomputed from scratch.
  UnitVector operator-() const {
    Vector neg(coords_.size());
    std::transform(coords_.begin(), coords_.end(), neg.begin(), [](double x) { return -x; });
    return UnitVector(std::move(neg));
  }

  friend bool operator==(const UnitVector&, const UnitVector&) = default;

 private:
  explicit UnitVector(Vector coords) : coords_(std::move(coords)) {}
  friend UnitVector normalize(std::span<const double> a);

  Vector coords_;
};

inline constexpr double kZeroVectorThreshold = 1e-300;

// a / ||a||_2: the unique maximizer on the sphere of y -> <a, y>.
inline UnitVector normalize(std::span<const double> a) {
  if (a.size() < 2) throw InvalidDimension("normalize: dimension must be >= 2");
  for (double x : a) {
    if (!std::isfinite(x)) throw MalformedInput("normalize: non-finite entries");
  }
  const double n = norm2(a);
  if (!(n > kZeroVectorThreshold)) throw ZeroVector("normalize: vector is (numerically) zero");
  Vector out(a.begin(), a.end());
  for (double& x : out) x /= n;
  return UnitVector(std::move(out));
}

enum class SphereScheme { generalized_spiral, random_uniform };

inline std::string_view to_string(SphereScheme s) {
  return s == SphereScheme::generalized_spiral ? "generalized-spiral" : "random-uniform";
}

inline SphereScheme sphere_scheme_from_string(std::string_view s) {
  if (s == "generalized-spiral") return SphereScheme::generalized_spiral;
  if (s == "random-uniform") return SphereScheme::random_uniform;
  throw MalformedInput("unknown sphere scheme '" + std::string(s) + "'");
}

// Finite antipodally closed sample of S^{n-1}. Points come in pairs
// (2i, 2i+1) with points[2i+1] == -points[2i]; a larger count with the same
// scheme and seed extends a smaller one (nested prefix).
struct SphereSample {
  std::size_t dimension = 0;
  std::vector<UnitVector> points;
  std::vector<std::size_t> pairing;
  std::uint64_t seed = 0;
  SphereScheme scheme = SphereScheme::generalized_spiral;

  std::size_t size() const noexcept { return points.size(); }
};

namespace detail {

inline Vector spiral_point(std::size_t n, std::uint64_t i, std::uint64_t seed,
                           const std::vector<double>& alphas) {
  Vector v(n);
  if (n == 2) {
    // Radical-inverse angles on the upper half circle; the antipodes fill the
    // lower half, so counts that are powers of two give the regular polygon.
    const double shift = seed == 0 ? 0.0 : hashed_unit(seed, 0);
    const double angle = std::numbers::pi * frac(van_der_corput(i) + shift);
    v[0] = std::cos(angle);
    v[1] = std::sin(angle);
    return v;
  }
  for (std::size_t j = 0; j < n; ++j) {
    const double shift = seed == 0 ? 0.0 : hashed_unit(seed, j);
    const double u = frac(0.5 + shift + static_cast<double>(i + 1) * alphas[j]);
    v[j] = normal_quantile(u);
  }
  return v;
}

}  // namespace detail

inline SphereSample sample_sphere(std::size_t n, std::size_t count,
                                  SphereScheme scheme = SphereScheme::generalized_spiral,
                                  std::uint64_t seed = 0) {
  if (n < 2) throw InvalidDimension("sample_sphere: n must be >= 2");
  if (count < 4 || count % 2 != 0) {
    throw InvalidCount("sample_sphere: count must be even and >= 4 (got " +
                       std::to_string(count) + ")");
  }
  SphereSample out;
  out.dimension = n;
  out.seed = seed;
  out.scheme = scheme;
  out.points.reserve(count);
  out.pairing.resize(count);

  const std::size_t half = count / 2;
  const auto alphas = detail::kronecker_alphas(n);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss;

  for (std::size_t i = 0; i < half; ++i) {
    Vector raw;
    if (scheme == SphereScheme::generalized_spiral) {
      raw = detail::spiral_point(n, i, seed, alphas);
    } else {
      do {
        raw.assign(n, 0.0);
        for (double& x : raw) x = gauss(rng);
      } while (norm2(raw) < 1e-8);
    }
    UnitVector p = normalize(raw);
    UnitVector antipode = -p;
    out.points.push_back(std::move(p));
    out.points.push_back(std::move(antipode));
    out.pairing[2 * i] = 2 * i + 1;
    out.pairing[2 * i + 1] = 2 * i;
  }
  return out;
}

}  // namespace unimax
