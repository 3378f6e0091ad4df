#pragma once

#include "unimax/domain.hpp"
#include "unimax/errors.hpp"
#include "unimax/geometry.hpp"

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <functional>
#include <istream>
#include <numbers>
#include <optional>
#include <ostream>
#include <regex>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace unimax {

using Coefficients = Vector;

// Writes the values of every generator at an ambient point into `out`.
using PointEvaluator = std::function<void(std::span<const double> point, std::span<double> out)>;

enum class IndependenceCheck { enforce, skip };

// Ordered generators f_1..f_n over a sampled domain. The evaluation table
// (sample-major, n values per sample) is built once at construction; the
// optional evaluator extends the generators between samples for refinement.
class FunctionFamily {
 public:
  static constexpr double kIndependenceThreshold = 1e-9;

  FunctionFamily(std::string name, std::vector<std::string> labels, SampledDomain domain,
                 PointEvaluator evaluator, IndependenceCheck check = IndependenceCheck::enforce)
      : name_(std::move(name)),
        labels_(std::move(labels)),
        domain_(std::move(domain)),
        evaluator_(std::move(evaluator)) {
    const std::size_t n = labels_.size();
    if (n == 0) throw InvalidDimension("family needs at least one generator");
    table_.resize(domain_.size() * n);
    for (std::size_t i = 0; i < domain_.size(); ++i) {
      evaluator_(domain_.point(i), std::span<double>(table_).subspan(i * n, n));
    }
    finish(check);
  }

  // Tabulated family: generator values are known only at the samples.
  FunctionFamily(std::string name, std::vector<std::string> labels, SampledDomain domain,
                 std::vector<double> table, IndependenceCheck check = IndependenceCheck::enforce)
      : name_(std::move(name)),
        labels_(std::move(labels)),
        domain_(std::move(domain)),
        table_(std::move(table)) {
    if (labels_.empty()) throw InvalidDimension("family needs at least one generator");
    if (table_.size() != domain_.size() * labels_.size()) {
      throw DimensionMismatch("tabulated family: table size does not match domain x generators");
    }
    finish(check);
  }

  const std::string& name() const noexcept { return name_; }
  const std::vector<std::string>& labels() const noexcept { return labels_; }
  std::size_t n() const noexcept { return labels_.size(); }
  const SampledDomain& domain() const noexcept { return domain_; }
  std::size_t size() const noexcept { return domain_.size(); }

  // Generator values (f_1(p_i), ..., f_n(p_i)) at sample i.
  std::span<const double> row(std::size_t i) const {
    return std::span<const double>(table_).subspan(i * n(), n());
  }
  std::span<const double> table() const noexcept { return table_; }

  // Can the family be evaluated away from the samples?
  bool is_continuous() const noexcept { return static_cast<bool>(evaluator_) && domain_.has_continuum(); }

  void evaluate_generators(std::span<const double> point, std::span<double> out) const {
    if (!evaluator_) throw MalformedInput("family '" + name_ + "' is tabulated only");
    evaluator_(point, out);
  }

  double evaluate(std::span<const double> coeffs, std::size_t index) const {
    check_coeffs(coeffs);
    if (index >= size()) throw std::out_of_range("evaluate: point index out of range");
    return dot_row(coeffs, index);
  }

  // Combination value at an arbitrary domain point (needs an evaluator).
  double evaluate_at(std::span<const double> coeffs, const DomainPoint& p) const {
    check_coeffs(coeffs);
    if (p.index && !is_continuous()) return dot_row(coeffs, *p.index);
    std::vector<double> g(n());
    evaluate_generators(p.coords, g);
    double s = 0.0;
    for (std::size_t k = 0; k < n(); ++k) s += coeffs[k] * g[k];
    return s;
  }

  // Unchecked inner loop shared by the certifier and the prober.
  double dot_row(std::span<const double> coeffs, std::size_t index) const noexcept {
    const double* r = table_.data() + index * n();
    double s = 0.0;
    for (std::size_t k = 0; k < coeffs.size(); ++k) s += coeffs[k] * r[k];
    return s;
  }

  void check_coeffs(std::span<const double> coeffs) const {
    if (coeffs.size() != n()) {
      throw DimensionMismatch("expected " + std::to_string(n()) + " coefficients, got " +
                              std::to_string(coeffs.size()));
    }
  }

  // Singular values of the size() x n evaluation matrix, descending.
  const std::vector<double>& singular_values() const noexcept { return singular_values_; }

  // Generator image F(p_i) = row(i), as a vector.
  Vector image(std::size_t i) const {
    auto r = row(i);
    return Vector(r.begin(), r.end());
  }

 private:
  void finish(IndependenceCheck check) {
    // Householder QR first so the small singular values come from R rather
    // than from the (squared) Gram matrix.
    const auto rows = static_cast<Eigen::Index>(domain_.size());
    const auto cols = static_cast<Eigen::Index>(n());
    Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> a(
        table_.data(), rows, cols);
    Eigen::MatrixXd r;
    if (rows >= cols) {
      Eigen::HouseholderQR<Eigen::MatrixXd> qr(a);
      r = qr.matrixQR().topRows(cols).template triangularView<Eigen::Upper>();
    } else {
      r = a;
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(r);
    const auto& sv = svd.singularValues();
    singular_values_.assign(sv.data(), sv.data() + sv.size());
    if (check == IndependenceCheck::skip) return;
    const double largest = singular_values_.empty() ? 0.0 : singular_values_.front();
    const bool full_rank = rows >= cols && largest > 0.0 &&
                           singular_values_.back() >= kIndependenceThreshold * largest;
    if (!full_rank) {
      throw LinearlyDependent("family '" + name_ + "': generators are linearly dependent on the sample");
    }
  }

  std::string name_;
  std::vector<std::string> labels_;
  SampledDomain domain_;
  PointEvaluator evaluator_;
  std::vector<double> table_;
  std::vector<double> singular_values_;
};

inline double evaluate(const FunctionFamily& family, std::span<const double> coeffs,
                       std::size_t point_index) {
  return family.evaluate(coeffs, point_index);
}

// ---------------------------------------------------------------------------
// The explicit families.

// {sin, cos} on [0, 2pi).
inline FunctionFamily make_circle_family(std::size_t resolution) {
  if (resolution < 16) throw ResolutionTooSmall("circle family: resolution must be >= 16");
  return FunctionFamily("circle", {"sin", "cos"},
                        SampledDomain::half_open_interval(0.0, 2.0 * std::numbers::pi, resolution),
                        [](std::span<const double> p, std::span<double> out) {
                          out[0] = std::sin(p[0]);
                          out[1] = std::cos(p[0]);
                        });
}

// mu(t) = e^t for t <= 0 and 1 for t >= 0.
inline double real_line_mu(double t) { return t <= 0.0 ? std::exp(t) : 1.0; }

// x(t) = mu(t) cos(4 arctan|t|), y(t) = mu(t) sin(4 arctan|t|) on R.
inline FunctionFamily make_real_line_family(std::size_t resolution) {
  if (resolution < 64) throw ResolutionTooSmall("real-line family: resolution must be >= 64");
  return FunctionFamily("real-line", {"x", "y"}, SampledDomain::real_line(resolution),
                        [](std::span<const double> p, std::span<double> out) {
                          const double t = p[0];
                          const double mu = real_line_mu(t);
                          const double angle = 4.0 * std::atan(std::abs(t));
                          out[0] = mu * std::cos(angle);
                          out[1] = mu * std::sin(angle);
                        });
}

// Coordinate projections pi_1..pi_n on a sample of S^{n-1}.
inline FunctionFamily make_sphere_projection_family(std::size_t n, std::size_t resolution,
                                                    SphereScheme scheme = SphereScheme::generalized_spiral,
                                                    std::uint64_t seed = 0) {
  if (n < 2) throw InvalidDimension("sphere projection family: n must be >= 2");
  std::vector<std::string> labels;
  for (std::size_t i = 1; i <= n; ++i) labels.push_back("pi" + std::to_string(i));
  return FunctionFamily("sphere", std::move(labels),
                        SampledDomain::sphere_image(sample_sphere(n, resolution, scheme, seed)),
                        [](std::span<const double> p, std::span<double> out) {
                          std::copy(p.begin(), p.end(), out.begin());
                        });
}

// theta(x) = 2 pi x / (1 + x): homeomorphism [0, inf) -> [0, 2 pi).
inline double halfline_theta(double x) { return 2.0 * std::numbers::pi * x / (1.0 + x); }

// G on R: the circle map F(x) = (cos theta(x), sin theta(x)) for x >= 0, and
// for x < 0 the open segment from F(0) = (1, 0) to the origin,
// g(x) = F(0) / (1 - x), so ||G(x)|| < 1 off [0, inf) and g(x) -> F(0) as x -> 0-.
inline std::array<double, 2> halfline_extension_map(double x) {
  if (x >= 0.0) {
    const double th = halfline_theta(x);
    return {std::cos(th), std::sin(th)};
  }
  return {1.0 / (1.0 - x), 0.0};
}

inline FunctionFamily make_halfline_extension_family(std::size_t resolution) {
  if (resolution < 64) throw ResolutionTooSmall("halfline family: resolution must be >= 64");
  return FunctionFamily("halfline", {"pi1G", "pi2G"}, SampledDomain::real_line(resolution),
                        [](std::span<const double> p, std::span<double> out) {
                          const auto g = halfline_extension_map(p[0]);
                          out[0] = g[0];
                          out[1] = g[1];
                        });
}

// Truncated l2 example: generators j * y_j (j = 1..k) on the ball image
// {(a_1/1, ..., a_N/N) : ||a|| <= 1}. `candidates` are coefficient vectors
// whose analytic maximizers y_n = b_n / (n ||b||) are injected into the sample.
inline FunctionFamily make_l2_truncated_family(std::size_t k, std::size_t truncation, std::size_t count,
                                               std::span<const Vector> candidates = {},
                                               std::uint64_t seed = 0) {
  if (!(k >= 1 && k <= truncation && truncation <= 64)) {
    throw InvalidTruncation("l2 family: need 1 <= k <= N <= 64");
  }
  for (const auto& b : candidates) {
    if (b.size() != k) throw DimensionMismatch("l2 family: candidate length must equal k");
  }
  std::vector<std::string> labels;
  for (std::size_t j = 1; j <= k; ++j) labels.push_back(std::to_string(j) + "*pi" + std::to_string(j));
  return FunctionFamily("l2", std::move(labels),
                        SampledDomain::l2_truncated_ball(truncation, count, candidates, seed),
                        [k](std::span<const double> p, std::span<double> out) {
                          for (std::size_t j = 0; j < k; ++j) out[j] = static_cast<double>(j + 1) * p[j];
                        });
}

// Polynomials on the closed interval [lo, hi]; coefficients[i] lists the
// power-basis coefficients (constant term first) of generator i.
inline FunctionFamily make_polynomial_family(std::vector<Vector> coefficients, std::size_t resolution,
                                             double lo = 0.0, double hi = 1.0, std::string name = "polynomial") {
  if (coefficients.empty()) throw InvalidDimension("polynomial family needs generators");
  std::vector<std::string> labels;
  for (std::size_t i = 1; i <= coefficients.size(); ++i) labels.push_back("p" + std::to_string(i));
  return FunctionFamily(std::move(name), std::move(labels), SampledDomain::interval(lo, hi, resolution),
                        [coefficients](std::span<const double> p, std::span<double> out) {
                          for (std::size_t i = 0; i < coefficients.size(); ++i) {
                            double v = 0.0;
                            const auto& c = coefficients[i];
                            for (std::size_t d = c.size(); d-- > 0;) v = v * p[0] + c[d];
                            out[i] = v;
                          }
                        });
}

// ---------------------------------------------------------------------------
// CSV: header `x1,...,xm,g1,...,gn` (generator columns are those named g<k>),
// one row per domain point.

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream is(line);
  while (std::getline(is, cell, ',')) {
    const auto b = cell.find_first_not_of(" \t\r");
    const auto e = cell.find_last_not_of(" \t\r");
    out.push_back(b == std::string::npos ? std::string() : cell.substr(b, e - b + 1));
  }
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

inline double parse_number(const std::string& cell, std::size_t line_no) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(cell, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != cell.size() || !std::isfinite(v)) {
    throw MalformedInput("line " + std::to_string(line_no) + ": not a finite number: '" + cell + "'");
  }
  return v;
}

inline std::string format_number(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

}  // namespace detail

inline FunctionFamily load_family_csv(std::istream& in, std::string name = "csv",
                                      IndependenceCheck check = IndependenceCheck::enforce) {
  std::string line;
  if (!std::getline(in, line)) throw MalformedInput("csv family: missing header");
  const auto header = detail::split_csv_line(line);
  static const std::regex generator_column(R"(g[0-9]+)");
  std::vector<std::size_t> coord_cols;
  std::vector<std::size_t> gen_cols;
  std::vector<std::string> labels;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (std::regex_match(header[c], generator_column)) {
      gen_cols.push_back(c);
      labels.push_back(header[c]);
    } else {
      if (!gen_cols.empty()) throw MalformedInput("csv family: coordinate columns must precede g1..gn");
      coord_cols.push_back(c);
    }
  }
  if (coord_cols.empty()) throw MalformedInput("csv family: no coordinate columns");
  if (gen_cols.empty()) throw MalformedInput("csv family: no generator columns (g1, g2, ...)");

  std::vector<std::pair<Vector, Vector>> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto cells = detail::split_csv_line(line);
    if (cells.size() != header.size()) {
      throw MalformedInput("csv family: line " + std::to_string(line_no) + " has " +
                           std::to_string(cells.size()) + " cells, expected " + std::to_string(header.size()));
    }
    Vector p;
    Vector g;
    for (auto c : coord_cols) p.push_back(detail::parse_number(cells[c], line_no));
    for (auto c : gen_cols) g.push_back(detail::parse_number(cells[c], line_no));
    rows.emplace_back(std::move(p), std::move(g));
  }
  if (coord_cols.size() == 1) {
    std::stable_sort(rows.begin(), rows.end(),
                     [](const auto& a, const auto& b) { return a.first[0] < b.first[0]; });
  }
  std::vector<Vector> points;
  std::vector<double> table;
  for (auto& [p, g] : rows) {
    points.push_back(std::move(p));
    table.insert(table.end(), g.begin(), g.end());
  }
  return FunctionFamily(std::move(name), std::move(labels), SampledDomain::scattered(std::move(points)),
                        std::move(table), check);
}

inline void write_family_csv(const FunctionFamily& family, std::ostream& out) {
  const auto& d = family.domain();
  for (std::size_t k = 0; k < d.dimension(); ++k) out << (k ? "," : "") << "x" << (k + 1);
  for (std::size_t j = 0; j < family.n(); ++j) out << ",g" << (j + 1);
  out << "\n";
  for (std::size_t i = 0; i < d.size(); ++i) {
    auto p = d.point(i);
    for (std::size_t k = 0; k < p.size(); ++k) out << (k ? "," : "") << detail::format_number(p[k]);
    for (double v : family.row(i)) out << "," << detail::format_number(v);
    out << "\n";
  }
}

}  // namespace unimax
