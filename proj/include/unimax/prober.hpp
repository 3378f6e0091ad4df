#pragma once

#include "unimax/certifier.hpp"
#include "unimax/detail/parallel.hpp"
#include "unimax/domain.hpp"
#include "unimax/family.hpp"
#include "unimax/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace unimax {

// Sampled max locus D', its image X = F(D') and, per entry, the direction v
// whose combination sum v_i f_i it maximizes.
struct MaxLocus {
  std::vector<DomainPoint> dprime_points;
  std::vector<std::size_t> dprime_indices;
  std::vector<Vector> x_points;
  std::vector<UnitVector> direction_of;
  SphereSample directions;
  // For every sampled direction, the locus entry of its lowest-index maximizer.
  std::vector<std::size_t> entry_of_direction;

  std::size_t size() const noexcept { return x_points.size(); }
};

struct LocusOptions {
  SphereScheme scheme = SphereScheme::generalized_spiral;
  std::uint64_t seed = 0;
  // Absolute; default is relative per direction (see default_tie_tolerance).
  std::optional<double> tie_tolerance;
  Parallelism parallel{};
};

enum class CollisionKind { antipodal_collision, constant_direction, non_unique_combination };

inline std::string_view to_string(CollisionKind k) {
  switch (k) {
    case CollisionKind::antipodal_collision: return "antipodal-collision";
    case CollisionKind::constant_direction: return "constant-direction";
    case CollisionKind::non_unique_combination: return "non-unique-combination";
  }
  return "unknown";
}

struct CollisionWitness {
  CollisionKind kind;
  UnitVector v;
  // Image of the (lowest-index) maximizer for v and for -v.
  Vector x_v;
  Vector x_minus_v;
  double collision_distance = 0.0;
  std::string detail;
  // Separated maximizers of the combination v, when the kind is not an
  // antipodal collision.
  std::vector<DomainPoint> maximizers;
};

struct ProbeOptions {
  std::size_t sphere_resolution = 4096;
  std::optional<double> collision_tolerance;
  std::optional<double> exclusion_radius;
  std::optional<double> tie_tolerance;
  SphereScheme scheme = SphereScheme::generalized_spiral;
  std::uint64_t seed = 0;
  // Bisect between neighbouring directions whose maximizers jump apart, to
  // exhibit the tie direction explicitly.
  bool localize_discontinuities = true;
  std::size_t max_localizations = 64;
  Parallelism parallel{};
};

inline constexpr std::size_t kLocusListing = 64;

struct ProbeResult {
  // Empty means NoWitnessFound.
  std::optional<CollisionWitness> witness;
  double min_collision_distance = std::numeric_limits<double>::infinity();
  Vector min_direction;
  double collision_tolerance = 0.0;
  double exclusion_radius = 0.0;
  std::size_t sphere_resolution = 0;
  std::size_t locus_size = 0;
  // D' indices and images, kept only for small loci (at most kLocusListing).
  std::vector<std::size_t> locus_indices;
  std::vector<Vector> locus_images;
  // max over sampled v of ||x_v - v||; zero when the image is the sphere itself.
  double max_image_offset = 0.0;
  // h(v) = ||x_v - x_{-v}|| for each antipodal pair (directions 2i, 2i+1).
  std::vector<double> profile;
  std::vector<Vector> profile_directions;
  // Sampled directions whose combination was not certified unique.
  std::size_t tie_directions = 0;
  std::size_t inconclusive_directions = 0;
  std::size_t localization_attempts = 0;
};

struct FMapResult {
  Vector x_v;
  std::size_t entry = 0;
  std::size_t multiplicity = 0;
};

namespace detail {

struct DirectionMaxima {
  std::size_t argmax = 0;
  std::vector<std::size_t> tied;
};

inline DirectionMaxima direction_maxima(const FunctionFamily& family, std::span<const double> v,
                                        std::optional<double> tie_tolerance) {
  const std::size_t n = family.size();
  std::vector<double> values(n);
  for (std::size_t i = 0; i < n; ++i) values[i] = family.dot_row(v, i);
  DirectionMaxima out;
  out.argmax = argmax_index(values);
  const double m = values[out.argmax];
  const double tol = tie_tolerance.value_or(default_tie_tolerance(m, sup_abs(values)));
  for (std::size_t i = 0; i < n; ++i) {
    if (values[i] >= m - tol) out.tied.push_back(i);
  }
  return out;
}

inline std::size_t argmax_for(const FunctionFamily& family, std::span<const double> v) {
  std::size_t best = 0;
  double best_v = family.dot_row(v, 0);
  for (std::size_t i = 1; i < family.size(); ++i) {
    const double x = family.dot_row(v, i);
    if (x > best_v) {
      best_v = x;
      best = i;
    }
  }
  return best;
}

// Largest image gap between neighbouring samples: a Lipschitz-scaled mesh
// norm of F applied to the sample.
inline double image_mesh(const FunctionFamily& family) {
  const auto& domain = family.domain();
  const std::size_t n = family.size();
  double mesh = 0.0;
  if (domain.is_parametric()) {
    for (std::size_t i = 0; i + 1 < n; ++i) mesh = std::max(mesh, distance(family.row(i), family.row(i + 1)));
    if (domain.parameter_bounds().periodic && n > 1) {
      mesh = std::max(mesh, distance(family.row(n - 1), family.row(0)));
    }
    return mesh;
  }
  const std::size_t stride = std::max<std::size_t>(1, n / 256);
  for (std::size_t i = 0; i < n; i += stride) {
    double best = std::numeric_limits<double>::infinity();
    std::size_t nn = i;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      const double d = domain.distance(i, j);
      if (d < best) {
        best = d;
        nn = j;
      }
    }
    mesh = std::max(mesh, distance(family.row(i), family.row(nn)));
  }
  return mesh;
}

// Pairs of neighbouring sampled directions: cyclic angular order for n = 2,
// 2(n-1) nearest neighbours otherwise.
inline std::vector<std::pair<std::size_t, std::size_t>> neighbour_pairs(const SphereSample& dirs) {
  const std::size_t count = dirs.size();
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  if (dirs.dimension == 2) {
    std::vector<std::size_t> order(count);
    std::iota(order.begin(), order.end(), std::size_t{0});
    auto angle = [&](std::size_t i) { return std::atan2(dirs.points[i][1], dirs.points[i][0]); };
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      const double aa = angle(a);
      const double ab = angle(b);
      return aa < ab || (aa == ab && a < b);
    });
    for (std::size_t k = 0; k < count; ++k) {
      const std::size_t a = order[k];
      const std::size_t b = order[(k + 1) % count];
      pairs.emplace_back(std::min(a, b), std::max(a, b));
    }
  } else {
    const std::size_t k = std::min(count - 1, 2 * (dirs.dimension - 1));
    std::vector<std::pair<double, std::size_t>> d(count);
    for (std::size_t i = 0; i < count; ++i) {
      for (std::size_t j = 0; j < count; ++j) {
        d[j] = {j == i ? std::numeric_limits<double>::infinity()
                       : distance(dirs.points[i].coords(), dirs.points[j].coords()),
                j};
      }
      std::partial_sort(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(k), d.end());
      for (std::size_t m = 0; m < k; ++m) pairs.emplace_back(std::min(i, d[m].second), std::max(i, d[m].second));
    }
  }
  std::sort(pairs.begin(), pairs.end());
  pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());
  return pairs;
}

inline bool combination_is_constant(const FunctionFamily& family, std::span<const double> v, double tol) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (std::size_t i = 0; i < family.size(); ++i) {
    const double x = family.dot_row(v, i);
    lo = std::min(lo, x);
    hi = std::max(hi, x);
  }
  return hi - lo <= tol;
}

// A witnessed direction is "constant-direction" when g_v does not vary on the
// sampled domain at all, and "non-unique-combination" otherwise.
inline CollisionWitness witness_from_non_unique(const FunctionFamily& family, const UnitVector& v,
                                                const NonUniqueWitness& w, std::string detail_text) {
  const bool constant = combination_is_constant(family, v.coords(), w.tie_tolerance);
  const UnitVector minus = -v;
  const std::size_t first = argmax_for(family, v.coords());
  const std::size_t opposite = argmax_for(family, minus.coords());
  CollisionWitness out{constant ? CollisionKind::constant_direction : CollisionKind::non_unique_combination,
                       v,
                       family.image(first),
                       family.image(opposite),
                       0.0,
                       std::move(detail_text),
                       w.locations};
  out.collision_distance = distance(out.x_v, out.x_minus_v);
  return out;
}

}  // namespace detail

inline MaxLocus extract_max_locus(const FunctionFamily& family, std::size_t sphere_resolution,
                                  const LocusOptions& options = {}) {
  if (family.n() < 2) throw InvalidDimension("max locus needs a family with n >= 2");
  MaxLocus locus;
  locus.directions = sample_sphere(family.n(), sphere_resolution, options.scheme, options.seed);
  const auto& dirs = locus.directions.points;
  std::vector<detail::DirectionMaxima> maxima(dirs.size());
  detail::parallel_items(dirs.size(), options.parallel, [&](std::size_t d) {
    maxima[d] = detail::direction_maxima(family, dirs[d].coords(), options.tie_tolerance);
  });

  constexpr std::size_t kAbsent = std::numeric_limits<std::size_t>::max();
  std::vector<std::size_t> entry_of_sample(family.size(), kAbsent);
  locus.entry_of_direction.resize(dirs.size());
  for (std::size_t d = 0; d < dirs.size(); ++d) {
    for (std::size_t idx : maxima[d].tied) {
      if (entry_of_sample[idx] != kAbsent) continue;
      entry_of_sample[idx] = locus.size();
      locus.dprime_points.push_back(family.domain().sample(idx));
      locus.dprime_indices.push_back(idx);
      locus.x_points.push_back(family.image(idx));
      locus.direction_of.push_back(dirs[d]);
    }
    locus.entry_of_direction[d] = entry_of_sample[maxima[d].argmax];
  }
  return locus;
}

// x_v = argmax over X of <x, v>. The multiplicity counts near-maximal
// entries (within tie_tolerance) that are farther than `separation` apart in
// the domain; without a domain, every distinct entry counts.
inline FMapResult f_map(const UnitVector& v, const MaxLocus& locus, double tie_tolerance,
                        const SampledDomain* domain = nullptr, double separation = 0.0) {
  if (locus.size() == 0) throw InvalidCount("f_map: empty locus");
  std::vector<double> g(locus.size());
  std::size_t best = 0;
  for (std::size_t i = 0; i < locus.size(); ++i) {
    g[i] = dot(locus.x_points[i], v.coords());
    if (g[i] > g[best]) best = i;
  }
  // Same visiting order as the certifier's clustering: descending value, so
  // the first leader sits on the peak and a flat top stays one cluster.
  std::vector<std::size_t> candidates;
  for (std::size_t i = 0; i < locus.size(); ++i) {
    if (g[i] >= g[best] - tie_tolerance) candidates.push_back(i);
  }
  std::stable_sort(candidates.begin(), candidates.end(), [&](std::size_t a, std::size_t b) { return g[a] > g[b]; });
  std::vector<std::size_t> leaders;
  for (std::size_t i : candidates) {
    bool near = false;
    for (std::size_t l : leaders) {
      const double d = domain ? domain->distance(locus.dprime_points[i], locus.dprime_points[l])
                              : (i == l ? 0.0 : std::numeric_limits<double>::infinity());
      if (d <= separation) {
        near = true;
        break;
      }
    }
    if (!near) leaders.push_back(i);
  }
  return {locus.x_points[best], best, leaders.size()};
}

inline ProbeResult find_collision(const FunctionFamily& family, const ProbeOptions& options = {}) {
  if (family.n() < 2) throw InvalidDimension("find_collision needs a family with n >= 2");
  const auto& domain = family.domain();
  ProbeResult result;
  result.sphere_resolution = options.sphere_resolution;
  result.exclusion_radius = options.exclusion_radius.value_or(default_exclusion_radius(domain));
  result.collision_tolerance = options.collision_tolerance.value_or(5.0 * detail::image_mesh(family));

  const SphereSample dirs = sample_sphere(family.n(), options.sphere_resolution, options.scheme, options.seed);
  CertifyOptions copts;
  copts.exclusion_radius = result.exclusion_radius;
  copts.tie_tolerance = options.tie_tolerance;

  // (i) Certify each sampled direction; the first non-unique one is a witness.
  std::vector<CertifyOutcome> outcomes(dirs.size());
  detail::parallel_items(dirs.size(), options.parallel, [&](std::size_t d) {
    outcomes[d] = certify_unique_max(family, dirs.points[d].coords(), copts);
  });
  std::optional<std::size_t> first_non_unique;
  for (std::size_t d = 0; d < dirs.size(); ++d) {
    if (std::holds_alternative<NonUniqueWitness>(outcomes[d])) {
      ++result.tie_directions;
      if (!first_non_unique) first_non_unique = d;
    } else if (std::holds_alternative<InconclusiveMargin>(outcomes[d])) {
      ++result.inconclusive_directions;
    }
  }

  // (ii) Antipodal scan over the max locus.
  LocusOptions lopts;
  lopts.scheme = options.scheme;
  lopts.seed = options.seed;
  lopts.tie_tolerance = options.tie_tolerance;
  lopts.parallel = options.parallel;
  const MaxLocus locus = extract_max_locus(family, options.sphere_resolution, lopts);
  result.locus_size = locus.size();
  if (locus.size() <= kLocusListing) {
    result.locus_indices = locus.dprime_indices;
    result.locus_images = locus.x_points;
  }
  for (std::size_t d = 0; d < locus.directions.size(); ++d) {
    result.max_image_offset = std::max(
        result.max_image_offset, distance(locus.x_points[locus.entry_of_direction[d]], locus.directions.points[d].coords()));
  }

  auto locus_tolerance = [&](const UnitVector& v) {
    if (options.tie_tolerance) return *options.tie_tolerance;
    double sup = 0.0;
    double m = -std::numeric_limits<double>::infinity();
    for (const auto& x : locus.x_points) {
      const double g = dot(x, v.coords());
      sup = std::max(sup, std::abs(g));
      m = std::max(m, g);
    }
    return default_tie_tolerance(m, sup);
  };

  std::vector<FMapResult> fm(dirs.size());
  for (std::size_t d = 0; d < dirs.size(); ++d) {
    fm[d] = f_map(dirs.points[d], locus, locus_tolerance(dirs.points[d]), &domain, result.exclusion_radius);
  }
  std::size_t min_pair = 0;
  for (std::size_t d = 0; d < dirs.size(); d += 2) {
    const double h = distance(fm[d].x_v, fm[dirs.pairing[d]].x_v);
    result.profile.push_back(h);
    result.profile_directions.push_back(dirs.points[d].vector());
    if (h < result.min_collision_distance) {
      result.min_collision_distance = h;
      min_pair = d;
    }
  }
  result.min_direction = dirs.points[min_pair].vector();

  if (first_non_unique) {
    const std::size_t d = *first_non_unique;
    result.witness = detail::witness_from_non_unique(
        family, dirs.points[d], std::get<NonUniqueWitness>(outcomes[d]),
        "sampled direction " + std::to_string(d) + " has separated maximizers");
    return result;
  }

  if (result.min_collision_distance <= result.collision_tolerance) {
    const std::size_t d = min_pair;
    CollisionWitness w{CollisionKind::antipodal_collision,
                       dirs.points[d],
                       fm[d].x_v,
                       fm[dirs.pairing[d]].x_v,
                       result.min_collision_distance,
                       "antipodal directions share a maximizer image within tolerance",
                       {}};
    result.witness = std::move(w);
    return result;
  }

  for (std::size_t d = 0; d < dirs.size(); ++d) {
    if (fm[d].multiplicity >= 2) {
      const UnitVector& v = dirs.points[d];
      const UnitVector minus = -v;
      CollisionWitness w{CollisionKind::constant_direction,
                         v,
                         fm[d].x_v,
                         fm[dirs.pairing[d]].x_v,
                         distance(fm[d].x_v, fm[dirs.pairing[d]].x_v),
                         "g_v has " + std::to_string(fm[d].multiplicity) + " separated maximizers on X",
                         {}};
      w.maximizers.push_back(locus.dprime_points[fm[d].entry]);
      result.witness = std::move(w);
      return result;
    }
  }

  // (iii) The direction -> maximizer map is continuous wherever maxima are
  // unique. A jump between neighbouring directions brackets a direction
  // with two maximizers; bisect to it and certify there.
  if (options.localize_discontinuities) {
    struct Jump {
      double gap;
      std::size_t a;
      std::size_t b;
    };
    std::vector<Jump> jumps;
    for (auto [a, b] : detail::neighbour_pairs(dirs)) {
      const double gap = domain.distance(locus.dprime_indices[locus.entry_of_direction[a]],
                                         locus.dprime_indices[locus.entry_of_direction[b]]);
      if (gap > result.exclusion_radius) jumps.push_back({gap, a, b});
    }
    std::stable_sort(jumps.begin(), jumps.end(), [](const Jump& x, const Jump& y) { return x.gap > y.gap; });
    if (jumps.size() > options.max_localizations) jumps.resize(options.max_localizations);

    for (const auto& jump : jumps) {
      ++result.localization_attempts;
      Vector va = dirs.points[jump.a].vector();
      Vector vb = dirs.points[jump.b].vector();
      std::size_t ia = locus.dprime_indices[locus.entry_of_direction[jump.a]];
      std::size_t ib = locus.dprime_indices[locus.entry_of_direction[jump.b]];
      bool continuous = false;
      for (int it = 0; it < 200 && distance(va, vb) > 1e-13; ++it) {
        Vector mid(va.size());
        for (std::size_t k = 0; k < mid.size(); ++k) mid[k] = va[k] + vb[k];
        const UnitVector vm = normalize(mid);
        const std::size_t im = detail::argmax_for(family, vm.coords());
        if (domain.distance(im, ia) <= domain.distance(im, ib)) {
          va = vm.vector();
          ia = im;
        } else {
          vb = vm.vector();
          ib = im;
        }
        if (domain.distance(ia, ib) <= result.exclusion_radius) {
          continuous = true;
          break;
        }
      }
      if (continuous) continue;
      // Along (1 - l) va + l vb the gap <F(ia) - F(ib), v> is affine in l.
      Vector diff = family.image(ia);
      const auto fb = family.row(ib);
      for (std::size_t k = 0; k < diff.size(); ++k) diff[k] -= fb[k];
      const double g0 = dot(diff, va);
      const double g1 = dot(diff, vb);
      const double l = g0 - g1 > 0.0 ? std::clamp(g0 / (g0 - g1), 0.0, 1.0) : 0.5;
      Vector tie(va.size());
      for (std::size_t k = 0; k < tie.size(); ++k) tie[k] = (1.0 - l) * va[k] + l * vb[k];
      const UnitVector v = normalize(tie);
      const auto outcome = certify_unique_max(family, v.coords(), copts);
      if (const auto* w = std::get_if<NonUniqueWitness>(&outcome)) {
        result.witness = detail::witness_from_non_unique(
            family, v, *w,
            "tie direction localized between sampled directions " + std::to_string(jump.a) + " and " +
                std::to_string(jump.b));
        return result;
      }
    }
  }
  return result;
}

}  // namespace unimax
