#pragma once

#include "unimax/certifier.hpp"
#include "unimax/domain.hpp"
#include "unimax/errors.hpp"
#include "unimax/family.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <istream>
#include <limits>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace unimax {

// Values of f on the uniform grid t_i = i / (resolution - 1) of [0, 1].
class SampledFunction01 {
 public:
  static constexpr std::size_t kMinResolution = 17;

  explicit SampledFunction01(std::vector<double> values) : values_(std::move(values)) {
    if (values_.size() < kMinResolution) {
      throw ResolutionTooSmall("sampled function needs at least " + std::to_string(kMinResolution) +
                               " grid points");
    }
    for (double v : values_) {
      if (!std::isfinite(v)) throw MalformedInput("sampled function has non-finite values");
    }
  }

  static SampledFunction01 from_function(const std::function<double(double)>& f, std::size_t resolution) {
    if (resolution < kMinResolution) {
      throw ResolutionTooSmall("sampled function needs at least " + std::to_string(kMinResolution) +
                               " grid points");
    }
    std::vector<double> v(resolution);
    for (std::size_t i = 0; i < resolution; ++i) v[i] = f(grid_point(i, resolution));
    return SampledFunction01(std::move(v));
  }

  static double grid_point(std::size_t i, std::size_t resolution) {
    return i + 1 == resolution ? 1.0 : static_cast<double>(i) / static_cast<double>(resolution - 1);
  }

  std::size_t resolution() const noexcept { return values_.size(); }
  double step() const noexcept { return 1.0 / static_cast<double>(values_.size() - 1); }
  double t(std::size_t i) const { return grid_point(i, values_.size()); }
  double operator[](std::size_t i) const { return values_[i]; }
  const std::vector<double>& values() const noexcept { return values_; }

  std::size_t first_argmax() const {
    return static_cast<std::size_t>(std::max_element(values_.begin(), values_.end()) - values_.begin());
  }

  friend bool operator==(const SampledFunction01&, const SampledFunction01&) = default;

 private:
  std::vector<double> values_;
};

inline double sup_distance(const SampledFunction01& a, const SampledFunction01& b) {
  if (a.resolution() != b.resolution()) throw DimensionMismatch("sup distance: resolutions differ");
  double d = 0.0;
  for (std::size_t i = 0; i < a.resolution(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
  return d;
}

inline void write_sampled_csv(const SampledFunction01& f, std::ostream& out) {
  out << "t,value\n";
  for (std::size_t i = 0; i < f.resolution(); ++i) {
    out << detail::format_number(f.t(i)) << ',' << detail::format_number(f[i]) << '\n';
  }
}

inline SampledFunction01 read_sampled_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw MalformedInput("sampled csv: missing header");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = detail::split_csv_line(line);
  if (header.size() != 2 || header[0] != "t" || header[1] != "value") {
    throw MalformedInput("sampled csv: header must be 't,value'");
  }
  std::vector<double> ts;
  std::vector<double> values;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto cells = detail::split_csv_line(line);
    if (cells.size() != 2) throw MalformedInput("sampled csv: line " + std::to_string(line_no) + " needs 2 cells");
    ts.push_back(detail::parse_number(cells[0], line_no));
    values.push_back(detail::parse_number(cells[1], line_no));
  }
  if (ts.size() < SampledFunction01::kMinResolution) {
    throw ResolutionTooSmall("sampled csv: too few rows");
  }
  const double h = 1.0 / static_cast<double>(ts.size() - 1);
  for (std::size_t i = 0; i < ts.size(); ++i) {
    if (std::abs(ts[i] - SampledFunction01::grid_point(i, ts.size())) > 1e-9 * std::max(1.0, h * 1e3)) {
      throw MalformedInput("sampled csv: t column is not the uniform grid of [0,1] (row " +
                           std::to_string(i + 2) + ")");
    }
  }
  return SampledFunction01(std::move(values));
}

struct UnMembership {
  bool member = false;
  std::optional<std::size_t> witness_index;
  std::optional<double> witness;
  // f(x) - max_{|t-x| >= 1/n} f(t) at the witness.
  double gap = 0.0;
};

namespace detail {

// Grid offsets j with |t_j - t_i| >= 1/n, i.e. n |j - i| >= R - 1.
inline std::size_t far_offset(std::size_t resolution, std::size_t n) {
  const std::size_t span = resolution - 1;
  return (span + n - 1) / n;
}

inline void require_coarseness(std::size_t resolution, std::size_t n) {
  if (n == 0) throw MalformedInput("n must be a positive integer");
  if (resolution - 1 < 2 * n) {
    throw ResolutionTooCoarse("1/n = 1/" + std::to_string(n) + " is below two grid steps at resolution " +
                              std::to_string(resolution));
  }
}

// max over the far set of each grid point, -inf when it is empty.
inline std::vector<double> far_maxima(const SampledFunction01& f, std::size_t n) {
  const std::size_t r = f.resolution();
  const std::size_t w = far_offset(r, n);
  constexpr double kNone = -std::numeric_limits<double>::infinity();
  std::vector<double> prefix(r), suffix(r);
  for (std::size_t i = 0; i < r; ++i) prefix[i] = std::max(i ? prefix[i - 1] : kNone, f[i]);
  for (std::size_t i = r; i-- > 0;) suffix[i] = std::max(i + 1 < r ? suffix[i + 1] : kNone, f[i]);
  std::vector<double> out(r, kNone);
  for (std::size_t i = 0; i < r; ++i) {
    if (i >= w) out[i] = std::max(out[i], prefix[i - w]);
    if (i + w < r) out[i] = std::max(out[i], suffix[i + w]);
  }
  return out;
}

}  // namespace detail

// Grid points with an empty far set are not witnesses: the strict inequality
// must beat at least one value. The reported witness is the first grid
// maximizer when it qualifies, otherwise the first qualifying grid point.
inline UnMembership un_membership(const SampledFunction01& f, std::size_t n) {
  detail::require_coarseness(f.resolution(), n);
  const auto far = detail::far_maxima(f, n);
  auto qualifies = [&](std::size_t i) { return std::isfinite(far[i]) && f[i] > far[i]; };
  UnMembership out;
  std::optional<std::size_t> pick;
  const std::size_t top = f.first_argmax();
  if (qualifies(top)) {
    pick = top;
  } else {
    for (std::size_t i = 0; i < f.resolution(); ++i) {
      if (qualifies(i)) {
        pick = i;
        break;
      }
    }
  }
  if (pick) {
    out.member = true;
    out.witness_index = *pick;
    out.witness = f.t(*pick);
    out.gap = f[*pick] - far[*pick];
  }
  return out;
}

// f(x_i) - max_{|t - x_i| >= 1/n} f(t); -inf marks an empty far set.
inline double un_gap(const SampledFunction01& f, std::size_t n, std::size_t index) {
  detail::require_coarseness(f.resolution(), n);
  if (index >= f.resolution()) throw std::out_of_range("un_gap: index out of range");
  const std::size_t r = f.resolution();
  const std::size_t w = detail::far_offset(r, n);
  double far = -std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < r; ++j) {
    const std::size_t d = j > index ? j - index : index - j;
    if (d >= w) far = std::max(far, f[j]);
  }
  if (!std::isfinite(far)) return far;
  return f[index] - far;
}

// Raise h by a triangular bump of height epsilon at its first grid
// maximizer. The half-width stays below 1/n, so every far point keeps its
// value while the peak strictly grows.
inline SampledFunction01 bump_into_un(const SampledFunction01& h, double epsilon, std::size_t n) {
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) throw MalformedInput("bump_into_un: epsilon must be > 0");
  detail::require_coarseness(h.resolution(), n);
  const std::size_t x0 = h.first_argmax();
  const double t0 = h.t(x0);
  const double boundary = std::min(t0, 1.0 - t0);
  const double width = std::min(1.0 / (2.0 * static_cast<double>(n)), std::max(boundary, 2.0 * h.step()));
  std::vector<double> k(h.values());
  for (std::size_t i = 0; i < k.size(); ++i) {
    const double d = std::abs(h.t(i) - t0);
    if (d >= width) continue;
    const double bump = i == x0 ? epsilon : epsilon * (1.0 - d / width);
    double v = h[i] + bump;
    while (v - h[i] > epsilon) v = std::nextafter(v, -std::numeric_limits<double>::infinity());
    k[i] = v;
  }
  return SampledFunction01(std::move(k));
}

enum class ConsistencyVerdict { agree, disagree, inconclusive, n_max_too_small };

inline std::string_view to_string(ConsistencyVerdict v) {
  switch (v) {
    case ConsistencyVerdict::agree: return "agree";
    case ConsistencyVerdict::disagree: return "disagree";
    case ConsistencyVerdict::inconclusive: return "inconclusive";
    case ConsistencyVerdict::n_max_too_small: return "n_max too small";
  }
  return "unknown";
}

struct UnRow {
  std::size_t n = 0;
  UnMembership membership;
};

struct ConsistencyReport {
  ConsistencyVerdict verdict = ConsistencyVerdict::inconclusive;
  bool member_of_all = false;
  std::vector<UnRow> table;
  CertifyOutcome outcome;
  std::size_t resolution = 0;
  std::string diagnostics;
};

inline FunctionFamily sampled_function_family(const SampledFunction01& f) {
  return FunctionFamily("sampled", {"f"}, SampledDomain::interval(0.0, 1.0, f.resolution()), f.values(),
                        IndependenceCheck::skip);
}

// Compares membership in U_2 .. U_{n_max} against the certifier's verdict on
// f viewed as a one-generator family with coefficient 1.
inline ConsistencyReport intersection_consistency(const SampledFunction01& f, std::size_t n_max,
                                                  std::optional<double> exclusion_radius = std::nullopt,
                                                  std::optional<double> tie_tolerance = std::nullopt) {
  detail::require_coarseness(f.resolution(), n_max);
  ConsistencyReport rep;
  rep.resolution = f.resolution();
  rep.member_of_all = true;
  std::optional<std::size_t> first_failure;
  for (std::size_t n = std::min<std::size_t>(2, n_max); n <= n_max; ++n) {
    UnRow row{n, un_membership(f, n)};
    if (!row.membership.member) {
      rep.member_of_all = false;
      if (!first_failure) first_failure = n;
    }
    rep.table.push_back(row);
  }

  const auto family = sampled_function_family(f);
  CertifyOptions opts;
  opts.exclusion_radius = exclusion_radius;
  opts.tie_tolerance = tie_tolerance;
  const double one = 1.0;
  rep.outcome = certify_unique_max(family, std::span<const double>(&one, 1), opts);

  const std::string membership_text =
      rep.member_of_all ? "member of U_n for all n <= " + std::to_string(n_max)
                        : "not in U_" + std::to_string(*first_failure);
  if (std::holds_alternative<UniqueMaxCertificate>(rep.outcome)) {
    rep.verdict = rep.member_of_all ? ConsistencyVerdict::agree : ConsistencyVerdict::disagree;
    rep.diagnostics = membership_text + "; certified unique max";
  } else if (const auto* w = std::get_if<NonUniqueWitness>(&rep.outcome)) {
    if (!rep.member_of_all) {
      rep.verdict = ConsistencyVerdict::agree;
    } else if (w->separation < 1.0 / static_cast<double>(n_max)) {
      rep.verdict = ConsistencyVerdict::n_max_too_small;
    } else {
      rep.verdict = ConsistencyVerdict::disagree;
    }
    rep.diagnostics = membership_text + "; non-unique witness with separation " + detail::format_number(w->separation);
  } else {
    rep.verdict = ConsistencyVerdict::inconclusive;
    rep.diagnostics = membership_text + "; certifier inconclusive: " + std::get<InconclusiveMargin>(rep.outcome).reason;
  }
  return rep;
}

}  // namespace unimax
