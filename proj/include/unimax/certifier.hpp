#pragma once

#include "unimax/detail/parallel.hpp"
#include "unimax/domain.hpp"
#include "unimax/errors.hpp"
#include "unimax/family.hpp"
#include "unimax/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace unimax {

struct ArgmaxEntry {
  std::size_t index = 0;
  DomainPoint point;
  double value = 0.0;
};

struct RefinedPoint {
  DomainPoint point;
  double value = 0.0;
};

// The combination attains its sampled maximum in a single cluster, and every
// sample farther than exclusion_radius from `location` is at least `margin`
// below `value`.
struct UniqueMaxCertificate {
  DomainPoint location;
  double value = 0.0;
  double margin = 0.0;
  double exclusion_radius = 0.0;
  double tie_tolerance = 0.0;
  std::size_t resolution = 0;
  std::size_t sample_index = 0;
  double sampled_value = 0.0;
};

// At least two samples, pairwise farther apart than exclusion_radius, within
// tie_tolerance of the sampled maximum.
struct NonUniqueWitness {
  std::vector<DomainPoint> locations;
  std::vector<double> values;
  double value_gap = 0.0;
  double separation = 0.0;
  double exclusion_radius = 0.0;
  double tie_tolerance = 0.0;
  double sampled_max = 0.0;
  std::size_t resolution = 0;
  // Set when the number of clusters exceeded the reporting cap.
  bool truncated = false;
};

// A single near-maximal cluster was found but separation could not be
// established at this resolution. Never coerced into either verdict.
struct InconclusiveMargin {
  DomainPoint location;
  double value = 0.0;
  double margin = 0.0;
  double exclusion_radius = 0.0;
  double tie_tolerance = 0.0;
  std::size_t resolution = 0;
  std::string reason;
};

using CertifyOutcome = std::variant<UniqueMaxCertificate, NonUniqueWitness, InconclusiveMargin>;

struct CertifyOptions {
  std::optional<double> exclusion_radius;
  // Absolute tolerance; default is 1e-9 * max(|M|, sup |f|) over the samples.
  std::optional<double> tie_tolerance;
  std::optional<double> refine_radius;
  std::size_t refine_iterations = 200;
  Parallelism parallel{};
};

inline constexpr double kRelativeTieTolerance = 1e-9;
inline constexpr std::size_t kMaxWitnessClusters = 64;

inline double default_exclusion_radius(const SampledDomain& domain) {
  return std::min(10.0 * domain.fill_distance(), 0.25 * domain.diameter());
}

inline double default_tie_tolerance(double sampled_max, double sup_abs) {
  return kRelativeTieTolerance * std::max(std::abs(sampled_max), sup_abs);
}

namespace detail {

inline void require_nonzero(std::span<const double> coeffs) {
  for (double c : coeffs) {
    if (c != 0.0) return;
  }
  throw ZeroCombination("the zero combination has no unique maximum to certify");
}

inline std::vector<double> evaluate_all(const FunctionFamily& family, std::span<const double> coeffs,
                                        Parallelism par) {
  std::vector<double> values(family.size());
  parallel_for(values.size(), par, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) values[i] = family.dot_row(coeffs, i);
  });
  return values;
}

// Maximum value with lowest-index tie-break.
inline std::size_t argmax_index(std::span<const double> values) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] > values[best]) best = i;
  }
  return best;
}

inline double sup_abs(std::span<const double> values) {
  double s = 0.0;
  for (double v : values) s = std::max(s, std::abs(v));
  return s;
}

// Leader clustering of near-maximal samples: candidates are visited by
// descending value (ascending index on ties) and open a new cluster when they
// are farther than `radius` from every existing leader.
inline std::vector<std::size_t> cluster_leaders(const SampledDomain& domain, std::span<const double> values,
                                                double threshold, double radius, std::size_t cap,
                                                bool* truncated = nullptr) {
  std::vector<std::size_t> candidates;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (values[i] >= threshold) candidates.push_back(i);
  }
  std::sort(candidates.begin(), candidates.end(), [&](std::size_t a, std::size_t b) {
    return values[a] > values[b] || (values[a] == values[b] && a < b);
  });
  std::vector<std::size_t> leaders;
  if (truncated) *truncated = false;
  for (std::size_t c : candidates) {
    bool near = false;
    for (std::size_t l : leaders) {
      if (domain.distance(c, l) <= radius) {
        near = true;
        break;
      }
    }
    if (near) continue;
    if (leaders.size() == cap) {
      if (truncated) *truncated = true;
      break;
    }
    leaders.push_back(c);
  }
  return leaders;
}

// Refinement radius around sample i: two local sample spacings.
inline double local_spacing(const SampledDomain& domain, std::size_t i) {
  if (domain.is_parametric()) {
    const auto s = domain.parameters();
    double gap = 0.0;
    if (i > 0) gap = std::max(gap, s[i] - s[i - 1]);
    if (i + 1 < s.size()) gap = std::max(gap, s[i + 1] - s[i]);
    return gap;
  }
  return domain.fill_distance();
}

inline RefinedPoint golden_section(const FunctionFamily& family, std::span<const double> coeffs,
                                   std::size_t seed_index, double radius, std::size_t iterations) {
  const auto& domain = family.domain();
  const auto& bounds = domain.parameter_bounds();
  const double s0 = domain.parameter(seed_index);
  double a = s0 - radius;
  double b = s0 + radius;
  if (!bounds.periodic) {
    a = std::max(a, bounds.lowest());
    b = std::min(b, bounds.highest());
  }
  auto f = [&](double s) { return family.evaluate_at(coeffs, domain.at_parameter(s)); };

  const double seed_value = family.dot_row(coeffs, seed_index);
  double best_s = s0;
  double best_v = seed_value;
  auto consider = [&](double s, double v) {
    if (v > best_v) {
      best_v = v;
      best_s = s;
    }
  };

  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = f(c);
  double fd = f(d);
  consider(c, fc);
  consider(d, fd);
  for (std::size_t it = 0; it < iterations && (b - a) > 4.0 * std::numeric_limits<double>::epsilon() *
                                                              std::max(1.0, std::abs(s0));
       ++it) {
    if (fc >= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = f(c);
      consider(c, fc);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = f(d);
      consider(d, fd);
    }
  }

  // Golden section only resolves the peak to ~sqrt(eps) because values are
  // flat there. Polish by bisecting on the sign of the symmetric difference
  // f(s + h) - f(s - h), which stays informative much closer to the peak.
  if (best_v > seed_value) {
    const double h = 1e-3 * radius;
    double lo = best_s - 2.0 * h;
    double hi = best_s + 2.0 * h;
    const bool room = bounds.periodic || (lo - h >= bounds.lowest() && hi + h <= bounds.highest());
    auto sym = [&](double s) { return f(s + h) - f(s - h); };
    if (room && h > 0.0 && sym(lo) > 0.0 && sym(hi) < 0.0) {
      for (int it = 0; it < 80 && hi - lo > 0.0; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        (sym(mid) > 0.0 ? lo : hi) = mid;
      }
      const double s = 0.5 * (lo + hi);
      const double v = f(s);
      const double slack = 4.0 * std::numeric_limits<double>::epsilon() * std::abs(best_v);
      if (v >= best_v - slack && v >= seed_value) {
        best_s = s;
        best_v = v;
      }
    }
  }

  RefinedPoint out;
  if (best_s == s0) {
    out.point = domain.sample(seed_index);
  } else {
    out.point = domain.at_parameter(best_s);
  }
  out.value = best_v;
  return out;
}

// Orthonormal basis of the tangent space of the sphere at p.
inline std::vector<Vector> tangent_basis(std::span<const double> p) {
  const std::size_t n = p.size();
  std::vector<Vector> basis;
  basis.push_back(Vector(p.begin(), p.end()));
  for (std::size_t k = 0; k < n && basis.size() < n; ++k) {
    Vector e(n, 0.0);
    e[k] = 1.0;
    for (int pass = 0; pass < 2; ++pass) {
      for (const auto& b : basis) {
        const double c = dot(e, b);
        for (std::size_t j = 0; j < n; ++j) e[j] -= c * b[j];
      }
    }
    const double len = norm2(e);
    if (len < 1e-6) continue;
    for (double& x : e) x /= len;
    basis.push_back(std::move(e));
  }
  basis.erase(basis.begin());
  return basis;
}

// Nested stencil search: probe +-step along each tangent (or coordinate)
// direction, move to the best improvement, halve the step when none.
inline RefinedPoint stencil_search(const FunctionFamily& family, std::span<const double> coeffs,
                                   std::size_t seed_index, double radius, std::size_t iterations) {
  const auto& domain = family.domain();
  const bool on_sphere = domain.kind() == DomainKind::sphere_image;
  const std::size_t m = domain.dimension();
  auto p0 = domain.point(seed_index);
  Vector p(p0.begin(), p0.end());
  const double seed_value = family.dot_row(coeffs, seed_index);
  double value = seed_value;
  double step = radius;
  bool moved = false;
  std::vector<Vector> axes;
  if (!on_sphere) {
    for (std::size_t k = 0; k < m; ++k) {
      Vector e(m, 0.0);
      e[k] = 1.0;
      axes.push_back(std::move(e));
    }
  }
  DomainPoint probe;
  Vector best_q;
  const double floor_step = 1e-15 * std::max(1.0, norm2(p));
  for (std::size_t it = 0; it < iterations && step > floor_step; ++it) {
    if (on_sphere) axes = tangent_basis(p);
    double best_v = value;
    best_q.clear();
    for (const auto& e : axes) {
      for (double sign : {1.0, -1.0}) {
        Vector q = p;
        for (std::size_t j = 0; j < m; ++j) q[j] += sign * step * e[j];
        domain.retract(q);
        probe.coords = q;
        const double v = family.evaluate_at(coeffs, probe);
        if (v > best_v) {
          best_v = v;
          best_q = std::move(q);
        }
      }
    }
    if (!best_q.empty()) {
      p = std::move(best_q);
      value = best_v;
      moved = true;
    } else {
      step *= 0.5;
    }
  }
  RefinedPoint out;
  if (moved) {
    out.point.coords = std::move(p);
  } else {
    out.point = domain.sample(seed_index);
  }
  out.value = value;
  return out;
}

}  // namespace detail

// Exact top_k samples of the combination, sorted by descending value with
// ascending index on ties.
inline std::vector<ArgmaxEntry> brute_force_argmax(const FunctionFamily& family, std::span<const double> coeffs,
                                                   std::size_t top_k = 1, Parallelism par = {}) {
  family.check_coeffs(coeffs);
  detail::require_nonzero(coeffs);
  if (top_k == 0) throw InvalidCount("brute_force_argmax: top_k must be >= 1");
  const auto values = detail::evaluate_all(family, coeffs, par);
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  const std::size_t k = std::min(top_k, order.size());
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k), order.end(),
                    [&](std::size_t a, std::size_t b) {
                      return values[a] > values[b] || (values[a] == values[b] && a < b);
                    });
  std::vector<ArgmaxEntry> out;
  out.reserve(k);
  for (std::size_t i = 0; i < k; ++i) {
    out.push_back({order[i], family.domain().sample(order[i]), values[order[i]]});
  }
  return out;
}

// Local ascent from a sample: golden section in the parameter for 1-D
// domains, nested stencil search otherwise. Never returns a lower value than
// the seed; tabulated families and radius <= 0 return the seed.
inline RefinedPoint refine_local(const FunctionFamily& family, std::span<const double> coeffs,
                                 std::size_t seed_index, double radius, std::size_t iterations = 200) {
  family.check_coeffs(coeffs);
  if (seed_index >= family.size()) throw std::out_of_range("refine_local: seed index out of range");
  if (!(radius > 0.0) || iterations == 0 || !family.is_continuous()) {
    return {family.domain().sample(seed_index), family.dot_row(coeffs, seed_index)};
  }
  if (family.domain().is_parametric()) {
    return detail::golden_section(family, coeffs, seed_index, radius, iterations);
  }
  return detail::stencil_search(family, coeffs, seed_index, radius, iterations);
}

inline CertifyOutcome certify_unique_max(const FunctionFamily& family, std::span<const double> coeffs,
                                         const CertifyOptions& options = {}) {
  family.check_coeffs(coeffs);
  detail::require_nonzero(coeffs);
  const auto& domain = family.domain();
  const auto values = detail::evaluate_all(family, coeffs, options.parallel);
  const std::size_t top = detail::argmax_index(values);
  const double sampled_max = values[top];
  const double tol = options.tie_tolerance.value_or(default_tie_tolerance(sampled_max, detail::sup_abs(values)));
  const double radius = options.exclusion_radius.value_or(default_exclusion_radius(domain));
  if (!(radius > 0.0)) throw MalformedInput("certify: exclusion radius must be > 0");
  if (!(tol >= 0.0)) throw MalformedInput("certify: tie tolerance must be >= 0");

  bool truncated = false;
  const auto leaders =
      detail::cluster_leaders(domain, values, sampled_max - tol, radius, kMaxWitnessClusters, &truncated);

  if (leaders.size() > 1) {
    NonUniqueWitness w;
    w.exclusion_radius = radius;
    w.tie_tolerance = tol;
    w.sampled_max = sampled_max;
    w.resolution = domain.resolution();
    w.truncated = truncated;
    w.separation = std::numeric_limits<double>::infinity();
    double lowest = sampled_max;
    for (std::size_t a = 0; a < leaders.size(); ++a) {
      w.locations.push_back(domain.sample(leaders[a]));
      w.values.push_back(values[leaders[a]]);
      lowest = std::min(lowest, values[leaders[a]]);
      for (std::size_t b = 0; b < a; ++b) {
        w.separation = std::min(w.separation, domain.distance(leaders[a], leaders[b]));
      }
    }
    w.value_gap = sampled_max - lowest;
    return w;
  }

  const double refine_radius =
      options.refine_radius.value_or(std::min(radius, 2.0 * detail::local_spacing(domain, top)));
  RefinedPoint refined = refine_local(family, coeffs, top, refine_radius, options.refine_iterations);
  if (refined.value < sampled_max) refined = {domain.sample(top), sampled_max};

  bool any_outside = false;
  double best_outside = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (values[i] > best_outside && domain.distance(refined.point, i) > radius) {
      best_outside = values[i];
      any_outside = true;
    }
  }

  if (!any_outside || !(refined.value - best_outside > 0.0)) {
    InconclusiveMargin inc;
    inc.location = refined.point;
    inc.value = refined.value;
    inc.margin = any_outside ? refined.value - best_outside : 0.0;
    inc.exclusion_radius = radius;
    inc.tie_tolerance = tol;
    inc.resolution = domain.resolution();
    inc.reason = any_outside ? "non-positive margin after refinement"
                             : "no samples outside the exclusion ball";
    return inc;
  }

  UniqueMaxCertificate cert;
  cert.location = std::move(refined.point);
  cert.value = refined.value;
  cert.margin = refined.value - best_outside;
  cert.exclusion_radius = radius;
  cert.tie_tolerance = tol;
  cert.resolution = domain.resolution();
  cert.sample_index = top;
  cert.sampled_value = sampled_max;
  return cert;
}

// The maximizer of <a, y> over S^{n-1} is a / ||a||, with value ||a||.
inline std::pair<UnitVector, double> closed_form_sphere_argmax(std::span<const double> coeffs) {
  UnitVector z = normalize(coeffs);
  return {std::move(z), norm2(coeffs)};
}

}  // namespace unimax
