#pragma once

#include "unimax/detail/sequences.hpp"
#include "unimax/errors.hpp"
#include "unimax/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <numbers>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace unimax {

enum class DomainKind {
  interval,
  half_open_interval,
  circle_angle,
  real_line_reparam,
  euclidean_grid,
  sphere_image,
  l2_truncated_ball,
};

inline std::string_view to_string(DomainKind k) {
  switch (k) {
    case DomainKind::interval: return "interval";
    case DomainKind::half_open_interval: return "half-open-interval";
    case DomainKind::circle_angle: return "circle-angle";
    case DomainKind::real_line_reparam: return "real-line-reparam";
    case DomainKind::euclidean_grid: return "euclidean-grid";
    case DomainKind::sphere_image: return "sphere-image";
    case DomainKind::l2_truncated_ball: return "l2-truncated-ball";
  }
  return "unknown";
}

// A location in a domain: ambient coordinates, plus the 1-D parameter for
// parametric kinds and the sample index when it is a sample.
struct DomainPoint {
  Vector coords;
  std::optional<double> parameter;
  std::optional<std::size_t> index;
};

struct ParameterBounds {
  double lo = 0.0;
  double hi = 0.0;
  bool lo_open = false;
  bool hi_open = false;
  bool periodic = false;

  // Closest representable parameters that still belong to the domain.
  double lowest() const { return lo_open ? std::nextafter(lo, hi) : lo; }
  double highest() const { return hi_open ? std::nextafter(hi, lo) : hi; }
};

// Finite sample of a concrete domain D. Immutable after construction.
//
// For the 1-D kinds the sample is ordered by a parameter s and distances are
// measured in s. For real-line-reparam, s ranges over (-1, 1) and the ambient
// point is t = s / (1 - s^2), so the metric is that of the compactified line;
// every other parametric kind has t = s.
class SampledDomain {
 public:
  // Closed interval [lo, hi] with both endpoints sampled.
  static SampledDomain interval(double lo, double hi, std::size_t resolution) {
    if (resolution < 2) throw ResolutionTooSmall("interval: resolution must be >= 2");
    if (!(hi > lo)) throw MalformedInput("interval: need lo < hi");
    SampledDomain d(DomainKind::interval, 1);
    d.bounds_ = {lo, hi, false, false, false};
    d.params_.resize(resolution);
    for (std::size_t i = 0; i < resolution; ++i) {
      d.params_[i] = i + 1 == resolution
                         ? hi
                         : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(resolution - 1);
    }
    d.finish_parametric(resolution);
    d.metadata_["lo"] = lo;
    d.metadata_["hi"] = hi;
    return d;
  }

  // [lo, hi): the right endpoint is never sampled, the last sample sits one
  // step inside.
  static SampledDomain half_open_interval(double lo, double hi, std::size_t resolution) {
    if (resolution < 2) throw ResolutionTooSmall("half-open interval: resolution must be >= 2");
    if (!(hi > lo)) throw MalformedInput("half-open interval: need lo < hi");
    SampledDomain d(DomainKind::half_open_interval, 1);
    d.bounds_ = {lo, hi, false, true, false};
    d.params_.resize(resolution);
    for (std::size_t i = 0; i < resolution; ++i) {
      d.params_[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(resolution);
    }
    d.finish_parametric(resolution);
    d.metadata_["lo"] = lo;
    d.metadata_["hi"] = hi;
    return d;
  }

  // Angles on the circle with the periodic (arc-length) metric.
  static SampledDomain circle_angle(std::size_t resolution) {
    if (resolution < 3) throw ResolutionTooSmall("circle-angle: resolution must be >= 3");
    SampledDomain d(DomainKind::circle_angle, 1);
    const double two_pi = 2.0 * std::numbers::pi;
    d.bounds_ = {0.0, two_pi, false, true, true};
    d.params_.resize(resolution);
    for (std::size_t i = 0; i < resolution; ++i) {
      d.params_[i] = two_pi * static_cast<double>(i) / static_cast<double>(resolution);
    }
    d.finish_parametric(resolution);
    return d;
  }

  // The real line through s -> s / (1 - s^2) on (-1, 1). The uniform s-grid
  // always contains s = 0 (t = 0); for even resolution it is inserted.
  static SampledDomain real_line(std::size_t resolution) {
    if (resolution < 3) throw ResolutionTooSmall("real-line: resolution must be >= 3");
    SampledDomain d(DomainKind::real_line_reparam, 1);
    d.bounds_ = {-1.0, 1.0, true, true, false};
    const double step = 2.0 / static_cast<double>(resolution + 1);
    d.params_.reserve(resolution + 1);
    for (std::size_t i = 0; i < resolution; ++i) {
      if (resolution % 2 == 1) {
        // Integer offsets from the centre keep the grid exactly symmetric.
        const auto k = static_cast<std::ptrdiff_t>(i + 1) - static_cast<std::ptrdiff_t>((resolution + 1) / 2);
        d.params_.push_back(static_cast<double>(2 * k) / static_cast<double>(resolution + 1));
      } else {
        d.params_.push_back(-1.0 + step * static_cast<double>(i + 1));
      }
    }
    if (resolution % 2 == 0) {
      d.params_.insert(std::upper_bound(d.params_.begin(), d.params_.end(), 0.0), 0.0);
    }
    d.finish_parametric(resolution);
    return d;
  }

  // Regular grid over the box [lo, hi] with per_axis points per axis.
  static SampledDomain euclidean_grid(Vector lo, Vector hi, std::size_t per_axis) {
    const std::size_t m = lo.size();
    if (m == 0 || hi.size() != m) throw DimensionMismatch("grid: bounds dimension mismatch");
    if (per_axis < 2) throw ResolutionTooSmall("grid: per_axis must be >= 2");
    std::size_t total = 1;
    for (std::size_t k = 0; k < m; ++k) {
      if (!(hi[k] > lo[k])) throw MalformedInput("grid: need lo < hi on every axis");
      if (total > (std::size_t{1} << 24) / per_axis) throw ResolutionTooSmall("grid too large");
      total *= per_axis;
    }
    SampledDomain d(DomainKind::euclidean_grid, m);
    d.points_.resize(total * m);
    std::vector<std::size_t> digit(m, 0);
    for (std::size_t i = 0; i < total; ++i) {
      for (std::size_t k = 0; k < m; ++k) {
        d.points_[i * m + k] =
            digit[k] + 1 == per_axis
                ? hi[k]
                : lo[k] + (hi[k] - lo[k]) * static_cast<double>(digit[k]) /
                              static_cast<double>(per_axis - 1);
      }
      for (std::size_t k = m; k-- > 0;) {
        if (++digit[k] < per_axis) break;
        digit[k] = 0;
      }
    }
    double fill = 0.0;
    double diam = 0.0;
    for (std::size_t k = 0; k < m; ++k) {
      const double half_step = 0.5 * (hi[k] - lo[k]) / static_cast<double>(per_axis - 1);
      fill += half_step * half_step;
      diam += (hi[k] - lo[k]) * (hi[k] - lo[k]);
    }
    d.fill_distance_ = std::sqrt(fill);
    d.diameter_ = std::sqrt(diam);
    d.resolution_ = per_axis;
    d.box_lo_ = std::move(lo);
    d.box_hi_ = std::move(hi);
    d.continuum_ = true;
    return d;
  }

  static SampledDomain sphere_image(SphereSample sample) {
    SampledDomain d(DomainKind::sphere_image, sample.dimension);
    d.points_.reserve(sample.size() * sample.dimension);
    for (const auto& p : sample.points) {
      d.points_.insert(d.points_.end(), p.coords().begin(), p.coords().end());
    }
    d.resolution_ = sample.size();
    d.diameter_ = 2.0;
    d.continuum_ = true;
    d.sphere_ = std::move(sample);
    d.metadata_["sphere_seed"] = static_cast<double>(d.sphere_->seed);
    d.fill_distance_ = d.probe_fill_distance(1024, 0x51ee7);
    return d;
  }

  // Points y = (a_1/1, ..., a_N/N) with a in the closed unit ball of R^N:
  // `count` quasi-random interior points followed by one point per injected
  // direction b (a = b / ||b||, zero padded to length N).
  static SampledDomain l2_truncated_ball(std::size_t truncation, std::size_t count,
                                         std::span<const Vector> injected,
                                         std::uint64_t seed = 0) {
    const std::size_t n = truncation;
    if (n < 1) throw InvalidTruncation("l2 ball: truncation must be >= 1");
    SampledDomain d(DomainKind::l2_truncated_ball, n);
    d.points_.reserve((count + injected.size()) * n);
    const auto alphas = detail::kronecker_alphas(n + 1);
    std::vector<double> shift(n + 1);
    for (std::size_t j = 0; j <= n; ++j) shift[j] = detail::hashed_unit(seed + 0x9000, j);
    Vector a(n);
    for (std::size_t i = 0; i < count; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        a[j] = detail::normal_quantile(
            detail::frac(shift[j] + static_cast<double>(i + 1) * alphas[j]));
      }
      const double len = norm2(a);
      const double radius = std::pow(
          detail::frac(shift[n] + static_cast<double>(i + 1) * alphas[n]), 1.0 / static_cast<double>(n));
      for (std::size_t j = 0; j < n; ++j) {
        d.points_.push_back(len > 0.0 ? a[j] / len * radius / static_cast<double>(j + 1) : 0.0);
      }
    }
    for (const auto& b : injected) {
      if (b.size() > n) throw DimensionMismatch("l2 ball: injected direction longer than truncation");
      const double len = norm2(b);
      if (!(len > kZeroVectorThreshold)) throw ZeroVector("l2 ball: injected direction is zero");
      for (std::size_t j = 0; j < n; ++j) {
        d.points_.push_back(j < b.size() ? b[j] / len / static_cast<double>(j + 1) : 0.0);
      }
    }
    d.resolution_ = count;
    d.injected_offset_ = count;
    d.diameter_ = 2.0;
    d.continuum_ = true;
    d.metadata_["truncation"] = static_cast<double>(n);
    d.metadata_["interior_count"] = static_cast<double>(count);
    d.metadata_["injected_count"] = static_cast<double>(injected.size());
    d.fill_distance_ = d.probe_fill_distance(32, seed + 0x77);
    return d;
  }

  // Arbitrary user-supplied samples (e.g. loaded from CSV). One-dimensional
  // samples become a closed interval (they must be strictly increasing);
  // higher-dimensional samples are a scattered euclidean-grid domain.
  // Neither supports evaluation between samples.
  static SampledDomain scattered(std::vector<Vector> points) {
    if (points.size() < 2) throw ResolutionTooSmall("scattered domain needs >= 2 points");
    const std::size_t m = points.front().size();
    if (m == 0) throw DimensionMismatch("scattered domain: empty point");
    for (const auto& p : points) {
      if (p.size() != m) throw DimensionMismatch("scattered domain: ragged points");
    }
    if (m == 1) {
      SampledDomain d(DomainKind::interval, 1);
      for (std::size_t i = 0; i < points.size(); ++i) {
        if (i > 0 && !(points[i][0] > points[i - 1][0])) {
          throw MalformedInput("1-D samples must be strictly increasing");
        }
        d.params_.push_back(points[i][0]);
      }
      d.bounds_ = {d.params_.front(), d.params_.back(), false, false, false};
      d.finish_parametric(points.size());
      d.continuum_ = false;
      return d;
    }
    auto sorted = points;
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t i = 1; i < sorted.size(); ++i) {
      if (sorted[i] == sorted[i - 1]) throw MalformedInput("scattered domain: duplicate points");
    }
    SampledDomain d(DomainKind::euclidean_grid, m);
    Vector lo = points.front();
    Vector hi = points.front();
    for (const auto& p : points) {
      d.points_.insert(d.points_.end(), p.begin(), p.end());
      for (std::size_t k = 0; k < m; ++k) {
        lo[k] = std::min(lo[k], p[k]);
        hi[k] = std::max(hi[k], p[k]);
      }
    }
    d.resolution_ = points.size();
    d.diameter_ = unimax::distance(lo, hi);
    d.box_lo_ = std::move(lo);
    d.box_hi_ = std::move(hi);
    d.continuum_ = false;
    d.fill_distance_ = d.nearest_neighbour_spread(256);
    return d;
  }

  DomainKind kind() const noexcept { return kind_; }
  std::size_t size() const noexcept { return points_.size() / dim_; }
  std::size_t dimension() const noexcept { return dim_; }
  std::size_t resolution() const noexcept { return resolution_; }

  std::span<const double> point(std::size_t i) const {
    return std::span<const double>(points_).subspan(i * dim_, dim_);
  }

  DomainPoint sample(std::size_t i) const {
    DomainPoint p;
    auto c = point(i);
    p.coords.assign(c.begin(), c.end());
    if (is_parametric()) p.parameter = params_[i];
    p.index = i;
    return p;
  }

  bool is_parametric() const noexcept { return !params_.empty(); }
  // Whether points between samples belong to the domain (and can be
  // evaluated by families that carry an evaluator).
  bool has_continuum() const noexcept { return continuum_; }
  std::span<const double> parameters() const noexcept { return params_; }
  double parameter(std::size_t i) const { return params_.at(i); }
  const ParameterBounds& parameter_bounds() const noexcept { return bounds_; }

  Vector point_at_parameter(double s) const {
    if (kind_ == DomainKind::real_line_reparam) return {s / (1.0 - s * s)};
    if (bounds_.periodic) {
      const double period = bounds_.hi - bounds_.lo;
      s = bounds_.lo + (s - bounds_.lo) - period * std::floor((s - bounds_.lo) / period);
    }
    return {s};
  }

  DomainPoint at_parameter(double s) const {
    DomainPoint p;
    if (bounds_.periodic) s = point_at_parameter(s)[0];
    p.coords = point_at_parameter(s);
    p.parameter = s;
    return p;
  }

  double parameter_distance(double a, double b) const {
    double d = std::abs(a - b);
    if (bounds_.periodic) d = std::min(d, (bounds_.hi - bounds_.lo) - d);
    return d;
  }

  double distance(std::size_t i, std::size_t j) const {
    if (is_parametric()) return parameter_distance(params_[i], params_[j]);
    return unimax::distance(point(i), point(j));
  }

  double distance(const DomainPoint& p, std::size_t j) const {
    if (is_parametric() && p.parameter) return parameter_distance(*p.parameter, params_[j]);
    return unimax::distance(p.coords, point(j));
  }

  double distance(const DomainPoint& p, const DomainPoint& q) const {
    if (is_parametric() && p.parameter && q.parameter) {
      return parameter_distance(*p.parameter, *q.parameter);
    }
    return unimax::distance(p.coords, q.coords);
  }

  // Maps an ambient point back into the domain (non-parametric kinds).
  void retract(std::span<double> y) const {
    switch (kind_) {
      case DomainKind::sphere_image: {
        const double len = norm2(y);
        if (len > 0.0) {
          for (double& x : y) x /= len;
        }
        break;
      }
      case DomainKind::euclidean_grid:
        for (std::size_t k = 0; k < dim_; ++k) y[k] = std::clamp(y[k], box_lo_[k], box_hi_[k]);
        break;
      case DomainKind::l2_truncated_ball: {
        double s = 0.0;
        for (std::size_t k = 0; k < dim_; ++k) {
          const double a = y[k] * static_cast<double>(k + 1);
          s += a * a;
        }
        if (s > 1.0) {
          const double len = std::sqrt(s);
          for (double& x : y) x /= len;
        }
        break;
      }
      default:
        break;
    }
  }

  // Covering radius estimate of the sample (largest distance from a domain
  // point to its nearest sample).
  double fill_distance() const noexcept { return fill_distance_; }
  double diameter() const noexcept { return diameter_; }

  const std::optional<SphereSample>& sphere() const noexcept { return sphere_; }
  std::size_t injected_offset() const noexcept { return injected_offset_; }
  const std::map<std::string, double>& metadata() const noexcept { return metadata_; }

 private:
  SampledDomain(DomainKind kind, std::size_t dim) : kind_(kind), dim_(dim) {}

  void finish_parametric(std::size_t resolution) {
    points_.resize(params_.size());
    for (std::size_t i = 0; i < params_.size(); ++i) points_[i] = point_at_parameter(params_[i])[0];
    resolution_ = resolution;
    continuum_ = true;
    const std::size_t n = params_.size();
    double fill = 0.0;
    if (bounds_.periodic) {
      for (std::size_t i = 0; i + 1 < n; ++i) fill = std::max(fill, 0.5 * (params_[i + 1] - params_[i]));
      fill = std::max(fill, 0.5 * (bounds_.hi - params_[n - 1] + params_[0] - bounds_.lo));
      diameter_ = 0.5 * (bounds_.hi - bounds_.lo);
    } else {
      for (std::size_t i = 0; i + 1 < n; ++i) fill = std::max(fill, 0.5 * (params_[i + 1] - params_[i]));
      fill = std::max({fill, params_[0] - bounds_.lo, bounds_.hi - params_[n - 1]});
      diameter_ = bounds_.hi - bounds_.lo;
    }
    fill_distance_ = fill;
  }

  Vector random_domain_point(std::mt19937_64& rng) const {
    std::normal_distribution<double> gauss;
    Vector y(dim_);
    for (double& x : y) x = gauss(rng);
    const double len = norm2(y);
    for (double& x : y) x /= len;
    if (kind_ == DomainKind::l2_truncated_ball) {
      const double r = std::pow(std::uniform_real_distribution<double>(0.0, 1.0)(rng),
                                1.0 / static_cast<double>(dim_));
      for (std::size_t k = 0; k < dim_; ++k) y[k] *= r / static_cast<double>(k + 1);
    }
    return y;
  }

  double probe_fill_distance(std::size_t probes, std::uint64_t seed) const {
    std::mt19937_64 rng(seed);
    double fill = 0.0;
    const std::size_t n = size();
    for (std::size_t p = 0; p < probes; ++p) {
      const Vector y = random_domain_point(rng);
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < n; ++i) {
        double s = 0.0;
        const double* q = points_.data() + i * dim_;
        for (std::size_t k = 0; k < dim_ && s < best; ++k) {
          const double diff = q[k] - y[k];
          s += diff * diff;
        }
        best = std::min(best, s);
      }
      fill = std::max(fill, std::sqrt(best));
    }
    return fill;
  }

  double nearest_neighbour_spread(std::size_t probes) const {
    const std::size_t n = size();
    const std::size_t stride = std::max<std::size_t>(1, n / probes);
    double spread = 0.0;
    for (std::size_t i = 0; i < n; i += stride) {
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t j = 0; j < n; ++j) {
        if (j != i) best = std::min(best, unimax::distance(point(i), point(j)));
      }
      spread = std::max(spread, best);
    }
    return spread;
  }

  DomainKind kind_;
  std::size_t dim_;
  std::vector<double> points_;
  std::vector<double> params_;
  ParameterBounds bounds_;
  std::size_t resolution_ = 0;
  double fill_distance_ = 0.0;
  double diameter_ = 0.0;
  bool continuum_ = false;
  Vector box_lo_;
  Vector box_hi_;
  std::optional<SphereSample> sphere_;
  std::size_t injected_offset_ = 0;
  std::map<std::string, double> metadata_;
};

}  // namespace unimax
