#pragma once

#include "unimax/certifier.hpp"
#include "unimax/config.hpp"
#include "unimax/family.hpp"
#include "unimax/gdelta.hpp"
#include "unimax/prober.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <thread>
#include <string>
#include <vector>

namespace unimax {

inline constexpr std::string_view kReportSchema = "unimax/1";
inline constexpr std::string_view kArtifactVersion = "1.0.0";
inline constexpr std::size_t kPlotPoints = 1000;

struct Report {
  Json doc;
  // Family table for `construct`; too large to live in the JSON.
  std::string family_csv;

  std::size_t inconclusive() const {
    return doc.contains("summary") ? doc["summary"].value("inconclusive", std::size_t{0}) : 0;
  }
};

// -- JSON encoding of module results -----------------------------------------

inline Json to_json_number(double x) { return std::isfinite(x) ? Json(x) : Json(nullptr); }

inline Json to_json(const DomainPoint& p) {
  Json j;
  j["coords"] = p.coords;
  if (p.parameter) j["parameter"] = *p.parameter;
  if (p.index) j["index"] = *p.index;
  return j;
}

inline Json to_json(const CertifyOutcome& outcome) {
  Json j;
  if (const auto* c = std::get_if<UniqueMaxCertificate>(&outcome)) {
    j["type"] = "unique-max-certificate";
    j["location"] = to_json(c->location);
    j["value"] = c->value;
    j["margin"] = c->margin;
    j["sample_index"] = c->sample_index;
    j["sampled_value"] = c->sampled_value;
    j["exclusion_radius"] = c->exclusion_radius;
    j["tie_tolerance"] = c->tie_tolerance;
    j["resolution"] = c->resolution;
  } else if (const auto* w = std::get_if<NonUniqueWitness>(&outcome)) {
    j["type"] = "non-unique-witness";
    Json locs = Json::array();
    for (const auto& p : w->locations) locs.push_back(to_json(p));
    j["locations"] = locs;
    j["values"] = w->values;
    j["value_gap"] = w->value_gap;
    j["separation"] = to_json_number(w->separation);
    j["sampled_max"] = w->sampled_max;
    j["truncated"] = w->truncated;
    j["exclusion_radius"] = w->exclusion_radius;
    j["tie_tolerance"] = w->tie_tolerance;
    j["resolution"] = w->resolution;
  } else {
    const auto& m = std::get<InconclusiveMargin>(outcome);
    j["type"] = "inconclusive-margin";
    j["location"] = to_json(m.location);
    j["value"] = m.value;
    j["margin"] = m.margin;
    j["reason"] = m.reason;
    j["exclusion_radius"] = m.exclusion_radius;
    j["tie_tolerance"] = m.tie_tolerance;
    j["resolution"] = m.resolution;
  }
  return j;
}

inline Json to_json(const ProbeResult& r) {
  Json j;
  if (r.witness) {
    const auto& w = *r.witness;
    j["type"] = "collision-witness";
    j["kind"] = to_string(w.kind);
    j["v"] = w.v.vector();
    j["x_v"] = w.x_v;
    j["x_minus_v"] = w.x_minus_v;
    j["collision_distance"] = w.collision_distance;
    j["detail"] = w.detail;
    Json m = Json::array();
    for (const auto& p : w.maximizers) m.push_back(to_json(p));
    j["maximizers"] = m;
  } else {
    j["type"] = "no-witness-found";
  }
  j["min_collision_distance"] = to_json_number(r.min_collision_distance);
  j["min_direction"] = r.min_direction;
  j["collision_tolerance"] = r.collision_tolerance;
  j["exclusion_radius"] = r.exclusion_radius;
  j["sphere_resolution"] = r.sphere_resolution;
  j["locus"] = {{"size", r.locus_size}, {"max_image_offset", r.max_image_offset}};
  if (!r.locus_indices.empty()) {
    j["locus"]["indices"] = r.locus_indices;
    j["locus"]["images"] = r.locus_images;
  }
  j["tie_directions"] = r.tie_directions;
  j["inconclusive_directions"] = r.inconclusive_directions;
  j["localization_attempts"] = r.localization_attempts;
  j["profile"] = {{"directions", r.profile_directions}, {"h", r.profile}};
  return j;
}

inline Json to_json(const UnMembership& m) {
  Json j;
  j["member"] = m.member;
  j["witness"] = m.witness ? Json(*m.witness) : Json(nullptr);
  j["witness_index"] = m.witness_index ? Json(*m.witness_index) : Json(nullptr);
  j["gap"] = m.member ? to_json_number(m.gap) : Json(nullptr);
  return j;
}

inline Json to_json(const ConsistencyReport& c) {
  Json j;
  j["verdict"] = to_string(c.verdict);
  j["member_of_all"] = c.member_of_all;
  j["resolution"] = c.resolution;
  j["certifier"] = to_json(c.outcome);
  j["diagnostics"] = c.diagnostics;
  return j;
}

// -- family construction from config ------------------------------------------

namespace detail {

inline std::size_t param_size(const Json& params, const char* key, std::size_t fallback, DiagnosticSink& sink) {
  if (auto v = read_unsigned(params, key, std::string("family.params.") + key, sink)) return *v;
  return fallback;
}

inline std::size_t default_resolution(const std::string& family) {
  if (family == "circle" || family == "sphere") return 4096;
  if (family == "real-line" || family == "halfline") return 20001;
  if (family == "l2") return 200000;
  return 10001;
}

inline std::string param_path(const Json& params, DiagnosticSink& sink) {
  const Json* p = find(params, "path");
  if (!p || !p->is_string()) {
    sink.add("family.params.path", "required path to a CSV file");
    return {};
  }
  return p->get<std::string>();
}

inline std::vector<Vector> polynomial_generators(const Json& params, DiagnosticSink& sink) {
  std::vector<Vector> gens;
  const Json* g = find(params, "generators");
  if (!g || !g->is_array() || g->empty()) {
    sink.add("family.params.generators", "required list of power-basis coefficient lists");
    return gens;
  }
  for (std::size_t i = 0; i < g->size(); ++i) {
    if (auto v = read_vector((*g)[i], "family.params.generators[" + std::to_string(i) + "]", sink)) {
      gens.push_back(std::move(*v));
    }
  }
  return gens;
}

inline std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw MalformedInput("cannot open '" + path + "'");
  return in;
}

}  // namespace detail

// Builds the configured family at `resolution`. Library errors become
// ConfigInvalid so that a bad config always exits the same way.
inline FunctionFamily build_family(const ExperimentConfig& cfg, std::size_t resolution,
                                   std::span<const Vector> l2_candidates = {}) {
  detail::DiagnosticSink sink;
  const auto& p = cfg.family.params;
  const auto& name = cfg.family.name;
  try {
    if (name == "circle") return make_circle_family(resolution);
    if (name == "real-line") return make_real_line_family(resolution);
    if (name == "halfline") return make_halfline_extension_family(resolution);
    if (name == "sphere") {
      const std::size_t n = detail::param_size(p, "n", 0, sink);
      if (n == 0 && sink.empty()) sink.add("family.params.n", "required integer >= 2");
      sink.raise_if_any();
      return make_sphere_projection_family(n, resolution, cfg.sphere_scheme, cfg.seed);
    }
    if (name == "l2") {
      const std::size_t k = detail::param_size(p, "k", 10, sink);
      const std::size_t truncation = detail::param_size(p, "truncation", 50, sink);
      sink.raise_if_any();
      return make_l2_truncated_family(k, truncation, resolution, l2_candidates, cfg.seed);
    }
    if (name == "polynomial") {
      auto gens = detail::polynomial_generators(p, sink);
      const auto lo = detail::read_number(p, "lo", "family.params.lo", sink, false).value_or(0.0);
      const auto hi = detail::read_number(p, "hi", "family.params.hi", sink, false).value_or(1.0);
      sink.raise_if_any();
      return make_polynomial_family(std::move(gens), resolution, lo, hi);
    }
    if (name == "csv") {
      const auto path = detail::param_path(p, sink);
      sink.raise_if_any();
      auto in = detail::open_input(path);
      const bool check = p.value("check", true);
      return load_family_csv(in, "csv", check ? IndependenceCheck::enforce : IndependenceCheck::skip);
    }
    if (name == "sampled") {
      const auto path = detail::param_path(p, sink);
      sink.raise_if_any();
      auto in = detail::open_input(path);
      return sampled_function_family(read_sampled_csv(in));
    }
  } catch (const ConfigInvalid&) {
    throw;
  } catch (const Error& e) {
    throw ConfigInvalid("family", e.what());
  }
  throw ConfigInvalid("family.name", "unknown family '" + name + "'");
}

inline std::size_t family_dimension(const ExperimentConfig& cfg, std::size_t resolution) {
  if (cfg.family.name == "l2") {
    detail::DiagnosticSink sink;
    const std::size_t k = detail::param_size(cfg.family.params, "k", 10, sink);
    sink.raise_if_any();
    return k;
  }
  return build_family(cfg, std::min<std::size_t>(resolution, 64)).n();
}

// `count` nonzero standard normal vectors in R^n from `seed`.
inline std::vector<Vector> sample_coefficients(std::size_t n, std::size_t count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss;
  std::vector<Vector> out;
  out.reserve(count);
  while (out.size() < count) {
    Vector v(n);
    for (double& x : v) x = gauss(rng);
    if (norm2(v) > 1e-8) out.push_back(std::move(v));
  }
  return out;
}

namespace detail {

inline std::vector<std::size_t> plot_indices(std::size_t size) {
  std::vector<std::size_t> idx;
  const std::size_t stride = std::max<std::size_t>(1, (size + kPlotPoints - 1) / kPlotPoints);
  for (std::size_t i = 0; i < size; i += stride) idx.push_back(i);
  if (!idx.empty() && idx.back() + 1 != size) idx.push_back(size - 1);
  return idx;
}

// Plot abscissa of sample i, or nullopt when the domain has no single
// parameter to plot against.
inline std::optional<double> plot_parameter(const SampledDomain& d, std::size_t i) {
  if (d.is_parametric()) return d.parameter(i);
  if (d.kind() == DomainKind::sphere_image && d.dimension() == 2) {
    const auto p = d.point(i);
    double a = std::atan2(p[1], p[0]);
    if (a < 0.0) a += 2.0 * std::numbers::pi;
    return a;
  }
  return std::nullopt;
}

inline std::optional<double> plot_parameter(const SampledDomain& d, const DomainPoint& p) {
  if (p.parameter) return *p.parameter;
  if (d.kind() == DomainKind::sphere_image && p.coords.size() == 2) {
    double a = std::atan2(p.coords[1], p.coords[0]);
    if (a < 0.0) a += 2.0 * std::numbers::pi;
    return a;
  }
  return std::nullopt;
}

inline Json unsupported_plot(std::string reason) { return {{"unsupported", std::move(reason)}}; }

inline std::string parameter_label(const SampledDomain& d) {
  if (d.kind() == DomainKind::real_line_reparam) return "s (t = s/(1-s^2))";
  if (d.kind() == DomainKind::circle_angle || d.kind() == DomainKind::sphere_image) return "angle";
  return "t";
}

inline Json curve_plot(const FunctionFamily& family, std::span<const double> coeffs,
                       const std::optional<std::pair<DomainPoint, double>>& marker, const std::string& label) {
  const auto& d = family.domain();
  if (!plot_parameter(d, 0)) {
    return unsupported_plot("domain " + std::string(to_string(d.kind())) + " of dimension " +
                            std::to_string(d.dimension()) + " has parameter dimension > 1");
  }
  std::vector<std::pair<double, double>> pts;
  for (std::size_t i : plot_indices(d.size())) pts.emplace_back(*plot_parameter(d, i), family.dot_row(coeffs, i));
  std::stable_sort(pts.begin(), pts.end());
  Json xs = Json::array();
  Json ys = Json::array();
  for (auto [x, y] : pts) {
    xs.push_back(x);
    ys.push_back(y);
  }
  Json plot;
  plot["kind"] = "curve";
  plot["x_label"] = parameter_label(d);
  plot["y_label"] = "g(x)";
  plot["series"] = Json::array({{{"label", label}, {"x", xs}, {"y", ys}}});
  plot["markers"] = Json::array();
  if (marker) {
    if (auto x = plot_parameter(d, marker->first)) {
      plot["markers"].push_back({{"label", "argmax"}, {"x", *x}, {"y", marker->second}});
    }
  }
  return plot;
}


inline Json collision_plot(const ProbeResult& r) {
  if (r.min_direction.size() != 2) {
    return unsupported_plot("collision profile plots need n = 2 directions");
  }
  std::vector<std::pair<double, double>> pts;
  for (std::size_t i = 0; i < r.profile.size(); ++i) {
    const auto& v = r.profile_directions[i];
    double a = std::atan2(v[1], v[0]);
    if (a < 0.0) a += 2.0 * std::numbers::pi;
    pts.emplace_back(a, r.profile[i]);
  }
  std::stable_sort(pts.begin(), pts.end());
  Json xs = Json::array();
  Json ys = Json::array();
  for (auto [x, y] : pts) {
    xs.push_back(x);
    ys.push_back(y);
  }
  Json plot;
  plot["kind"] = "collision-profile";
  plot["x_label"] = "direction angle";
  plot["y_label"] = "h(v) = |x_v - x_-v|";
  plot["series"] = Json::array({{{"label", "h(v)"}, {"x", xs}, {"y", ys}}});
  double a = std::atan2(r.min_direction[1], r.min_direction[0]);
  if (a < 0.0) a += 2.0 * std::numbers::pi;
  plot["markers"] = Json::array({{{"label", "min"}, {"x", a}, {"y", to_json_number(r.min_collision_distance)}}});
  return plot;
}

inline Json family_json(const FunctionFamily& f) {
  const auto& d = f.domain();
  Json dom;
  dom["kind"] = to_string(d.kind());
  dom["dimension"] = d.dimension();
  dom["size"] = d.size();
  dom["resolution"] = d.resolution();
  dom["fill_distance"] = d.fill_distance();
  dom["diameter"] = d.diameter();
  Json meta = Json::object();
  for (const auto& [k, v] : d.metadata()) meta[k] = v;
  dom["metadata"] = meta;
  return {{"name", f.name()}, {"labels", f.labels()}, {"n", f.n()}, {"domain", dom}};
}

struct SummaryCounter {
  std::size_t certificates = 0;
  std::size_t witnesses = 0;
  std::size_t inconclusive = 0;

  void add(const CertifyOutcome& o) {
    if (std::holds_alternative<UniqueMaxCertificate>(o)) ++certificates;
    else if (std::holds_alternative<NonUniqueWitness>(o)) ++witnesses;
    else ++inconclusive;
  }
  Json json() const {
    return {{"certificates", certificates}, {"witnesses", witnesses}, {"inconclusive", inconclusive}};
  }
};

inline std::optional<std::pair<DomainPoint, double>> outcome_marker(const CertifyOutcome& o) {
  if (const auto* c = std::get_if<UniqueMaxCertificate>(&o)) return std::pair{c->location, c->value};
  if (const auto* m = std::get_if<InconclusiveMargin>(&o)) return std::pair{m->location, m->value};
  const auto& w = std::get<NonUniqueWitness>(o);
  return std::pair{w.locations.front(), w.values.front()};
}

inline std::vector<Vector> resolve_coefficients(const ExperimentConfig& cfg, std::size_t n) {
  if (cfg.coeffs.values.empty() && cfg.coeffs.count == 0) throw ConfigInvalid("coeffs", "no coefficients given");
  if (!cfg.coeffs.sampled()) {
    std::vector<FieldDiagnostic> diags;
    for (std::size_t i = 0; i < cfg.coeffs.values.size(); ++i) {
      const auto& c = cfg.coeffs.values[i];
      const std::string field = cfg.coeffs.values.size() == 1 ? "coeffs" : "coeffs[" + std::to_string(i) + "]";
      if (c.size() != n) {
        diags.push_back({field, "expected " + std::to_string(n) + " coefficients, got " + std::to_string(c.size())});
      } else if (std::all_of(c.begin(), c.end(), [](double x) { return x == 0.0; })) {
        diags.push_back({field, "all coefficients are zero"});
      }
    }
    if (!diags.empty()) throw ConfigInvalid(diags);
    return cfg.coeffs.values;
  }
  return sample_coefficients(n, cfg.coeffs.count, cfg.coeffs.seed);
}

inline CertifyOptions certify_options(const ExperimentConfig& cfg, const Parallelism& par) {
  CertifyOptions o;
  o.exclusion_radius = cfg.tolerances.exclusion_radius;
  o.tie_tolerance = cfg.tolerances.tie_tolerance;
  o.parallel = par;
  return o;
}

inline void run_certify(const ExperimentConfig& cfg, const Parallelism& par, Report& rep) {
  const std::size_t res = cfg.resolutions.domain.value_or(default_resolution(cfg.family.name));
  const std::size_t n = family_dimension(cfg, res);
  const auto coeffs = resolve_coefficients(cfg, n);
  const auto family = build_family(cfg, res, cfg.family.name == "l2" ? std::span<const Vector>(coeffs)
                                                                    : std::span<const Vector>{});
  rep.doc["family"] = family_json(family);
  SummaryCounter summary;
  Json outcomes = Json::array();
  const auto opts = certify_options(cfg, par);
  std::optional<CertifyOutcome> first;
  for (const auto& c : coeffs) {
    auto o = certify_unique_max(family, c, opts);
    summary.add(o);
    Json j = to_json(o);
    j["coeffs"] = c;
    if (cfg.family.name == "sphere") {
      const auto [loc, value] = closed_form_sphere_argmax(c);
      j["closed_form"] = {{"location", loc.vector()}, {"value", value}};
    }
    outcomes.push_back(std::move(j));
    if (!first) first = std::move(o);
  }
  rep.doc["outcomes"] = std::move(outcomes);
  rep.doc["summary"] = summary.json();
  rep.doc["plot"] = curve_plot(family, coeffs.front(), outcome_marker(*first), "g = sum c_i f_i");
}

inline void run_sweep(const ExperimentConfig& cfg, const Parallelism& par, Report& rep) {
  std::vector<std::size_t> resolutions = cfg.resolutions.sweep;
  if (resolutions.empty()) resolutions.push_back(cfg.resolutions.domain.value_or(default_resolution(cfg.family.name)));
  const std::size_t n = family_dimension(cfg, resolutions.front());
  const auto coeffs = resolve_coefficients(cfg, n);
  const auto opts = certify_options(cfg, par);
  SummaryCounter total;
  Json rows = Json::array();
  Json outcomes = Json::array();
  for (std::size_t res : resolutions) {
    const auto family = build_family(cfg, res, cfg.family.name == "l2" ? std::span<const Vector>(coeffs)
                                                                      : std::span<const Vector>{});
    if (!rep.doc.contains("family")) rep.doc["family"] = family_json(family);
    SummaryCounter here;
    for (std::size_t i = 0; i < coeffs.size(); ++i) {
      auto o = certify_unique_max(family, coeffs[i], opts);
      here.add(o);
      total.add(o);
      Json j = to_json(o);
      j["coeffs"] = coeffs[i];
      j["coeff_index"] = i;
      outcomes.push_back(std::move(j));
    }
    Json row = here.json();
    row["resolution"] = res;
    rows.push_back(std::move(row));
  }
  rep.doc["resolutions"] = std::move(rows);
  rep.doc["outcomes"] = std::move(outcomes);
  rep.doc["summary"] = total.json();
  rep.doc["plot"] = unsupported_plot("sweep reports have no plot");
}

inline void run_construct(const ExperimentConfig& cfg, Report& rep) {
  const std::size_t res = cfg.resolutions.domain.value_or(default_resolution(cfg.family.name));
  std::vector<Vector> candidates;
  if (cfg.family.name == "l2" && !cfg.coeffs.values.empty()) candidates = cfg.coeffs.values;
  const auto family = build_family(cfg, res, candidates);
  Json fj = family_json(family);
  if (family.n() <= family.size()) fj["singular_values"] = family.singular_values();
  rep.doc["family"] = fj;
  rep.doc["outcomes"] = Json::array();
  rep.doc["summary"] = {{"inconclusive", 0}};
  std::ostringstream csv;
  write_family_csv(family, csv);
  rep.family_csv = csv.str();

  const auto& d = family.domain();
  if (!plot_parameter(d, 0)) {
    rep.doc["plot"] = unsupported_plot("domain has parameter dimension > 1");
    return;
  }
  Json plot;
  plot["kind"] = "curve";
  plot["x_label"] = parameter_label(d);
  plot["y_label"] = "f_i(x)";
  plot["series"] = Json::array();
  const auto idx = plot_indices(d.size());
  for (std::size_t g = 0; g < family.n(); ++g) {
    std::vector<std::pair<double, double>> pts;
    for (std::size_t i : idx) pts.emplace_back(*plot_parameter(d, i), family.row(i)[g]);
    std::stable_sort(pts.begin(), pts.end());
    Json xs = Json::array();
    Json ys = Json::array();
    for (auto [x, y] : pts) {
      xs.push_back(x);
      ys.push_back(y);
    }
    plot["series"].push_back({{"label", family.labels()[g]}, {"x", xs}, {"y", ys}});
  }
  plot["markers"] = Json::array();
  rep.doc["plot"] = plot;
}

inline void run_probe(const ExperimentConfig& cfg, const Parallelism& par, Report& rep) {
  const std::size_t res = cfg.resolutions.domain.value_or(default_resolution(cfg.family.name));
  const auto family = build_family(cfg, res);
  rep.doc["family"] = family_json(family);
  ProbeOptions opts;
  opts.sphere_resolution = cfg.resolutions.sphere;
  opts.collision_tolerance = cfg.tolerances.collision_tolerance;
  opts.exclusion_radius = cfg.tolerances.exclusion_radius;
  opts.tie_tolerance = cfg.tolerances.tie_tolerance;
  opts.scheme = cfg.sphere_scheme;
  opts.seed = cfg.seed;
  opts.parallel = par;
  ProbeResult r;
  try {
    r = find_collision(family, opts);
  } catch (const InvalidDimension& e) {
    throw ConfigInvalid("family", e.what());
  }
  rep.doc["outcomes"] = Json::array({to_json(r)});
  rep.doc["summary"] = {{"witness", r.witness.has_value()},
                        {"kind", r.witness ? Json(to_string(r.witness->kind)) : Json(nullptr)},
                        {"inconclusive", 0}};
  rep.doc["plot"] = collision_plot(r);
}

inline SampledFunction01 sampled_from_family(const ExperimentConfig& cfg, const FunctionFamily& family) {
  const auto& d = family.domain();
  const bool unit_grid = d.kind() == DomainKind::interval && d.parameter(0) == 0.0 &&
                         d.parameter(d.size() - 1) == 1.0;
  if (family.n() != 1 || !unit_grid || (cfg.family.name != "polynomial" && cfg.family.name != "sampled")) {
    throw ConfigInvalid("family", "gdelta needs a one-generator polynomial on [0,1] or a sampled t,value CSV");
  }
  std::vector<double> values(family.size());
  for (std::size_t i = 0; i < values.size(); ++i) values[i] = family.row(i)[0];
  return SampledFunction01(std::move(values));
}

inline void run_gdelta(const ExperimentConfig& cfg, Report& rep) {
  const std::size_t res = cfg.resolutions.domain.value_or(1001);
  const auto family = build_family(cfg, res);
  rep.doc["family"] = family_json(family);
  const auto f = sampled_from_family(cfg, family);
  if (f.resolution() - 1 < 2 * cfg.gdelta.n_max) {
    throw ConfigInvalid("gdelta.n_max", "1/n_max is below two grid steps at resolution " +
                                              std::to_string(f.resolution()));
  }
  if (cfg.gdelta.epsilon && f.resolution() - 1 < 2 * cfg.gdelta.bump_n) {
    throw ConfigInvalid("gdelta.bump_n", "1/bump_n is below two grid steps at resolution " +
                                               std::to_string(f.resolution()));
  }
  const auto cons = intersection_consistency(f, cfg.gdelta.n_max, cfg.tolerances.exclusion_radius,
                                             cfg.tolerances.tie_tolerance);
  Json table = Json::array();
  for (const auto& row : cons.table) {
    Json j = to_json(row.membership);
    j["n"] = row.n;
    table.push_back(std::move(j));
  }
  Json out;
  out["type"] = "gdelta";
  out["un_table"] = std::move(table);
  out["consistency"] = to_json(cons);
  Json plot;
  plot["kind"] = "curve";
  plot["x_label"] = "t";
  plot["y_label"] = "f(t)";
  plot["series"] = Json::array();
  auto add_series = [&](const SampledFunction01& g, const std::string& label) {
    Json xs = Json::array();
    Json ys = Json::array();
    for (std::size_t i : plot_indices(g.resolution())) {
      xs.push_back(g.t(i));
      ys.push_back(g[i]);
    }
    plot["series"].push_back({{"label", label}, {"x", xs}, {"y", ys}});
  };
  add_series(f, "f");
  plot["markers"] = Json::array();
  const std::size_t top = f.first_argmax();
  plot["markers"].push_back({{"label", "grid max"}, {"x", f.t(top)}, {"y", f[top]}});
  if (cfg.gdelta.epsilon) {
    const auto k = bump_into_un(f, *cfg.gdelta.epsilon, cfg.gdelta.bump_n);
    const auto m = un_membership(k, cfg.gdelta.bump_n);
    Json b = to_json(m);
    b["epsilon"] = *cfg.gdelta.epsilon;
    b["n"] = cfg.gdelta.bump_n;
    b["sup_distance"] = sup_distance(f, k);
    out["bump"] = std::move(b);
    add_series(k, "k = f + bump");
  }
  rep.doc["outcomes"] = Json::array({std::move(out)});
  rep.doc["summary"] = {{"verdict", to_string(cons.verdict)},
                        {"inconclusive", cons.verdict == ConsistencyVerdict::inconclusive ? 1 : 0}};
  rep.doc["plot"] = plot;
}

}  // namespace detail

// Dispatches the configured command and assembles the report. Only the
// "timing" block depends on anything besides config and seeds.
inline Report run(const ExperimentConfig& cfg, const Parallelism& par = {}) {
  const auto start = std::chrono::steady_clock::now();
  Report rep;
  rep.doc["schema"] = kReportSchema;
  rep.doc["artifact_version"] = kArtifactVersion;
  rep.doc["command"] = to_string(cfg.command);
  rep.doc["config"] = config_to_json(cfg);
  rep.doc["seeds"] = {{"config", cfg.seed}, {"coeffs", cfg.coeffs.seed}, {"sphere", cfg.seed}, {"domain", cfg.seed}};
  switch (cfg.command) {
    case Command::construct: detail::run_construct(cfg, rep); break;
    case Command::certify: detail::run_certify(cfg, par, rep); break;
    case Command::sweep: detail::run_sweep(cfg, par, rep); break;
    case Command::probe: detail::run_probe(cfg, par, rep); break;
    case Command::gdelta: detail::run_gdelta(cfg, rep); break;
  }
  const auto elapsed = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start);
  const std::size_t threads = par.threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : par.threads;
  rep.doc["timing"] = {{"elapsed_ms", elapsed.count()}, {"threads", threads}};
  return rep;
}

inline Report run(const Json& config_doc, const Parallelism& par = {}) { return run(parse_config(config_doc), par); }

// -- emission -----------------------------------------------------------------

enum class Format { json, csv, svg };

inline std::string render_json(const Report& rep) { return rep.doc.dump(2) + "\n"; }

inline Report read_report(std::istream& in) {
  Report rep;
  try {
    rep.doc = Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw MalformedInput(std::string("report: ") + e.what());
  }
  if (!rep.doc.is_object() || rep.doc.value("schema", std::string{}) != kReportSchema) {
    throw MalformedInput("report: missing or unknown schema");
  }
  return rep;
}

// The report without its timing block; equal across reruns of one config.
inline Json without_timing(const Report& rep) {
  Json j = rep.doc;
  j.erase("timing");
  return j;
}

namespace detail {

inline std::string csv_cell(const Json& v) {
  if (v.is_null()) return "";
  if (v.is_string()) return v.get<std::string>();
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  if (v.is_number_float()) return format_number(v.get<double>());
  if (v.is_number()) return v.dump();
  if (v.is_array()) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? " " : "") + csv_cell(v[i]);
    return s;
  }
  return v.dump();
}

inline Json outcome_location(const Json& o) {
  if (o.contains("location")) return o["location"]["coords"];
  if (o.contains("locations") && !o["locations"].empty()) return o["locations"][0]["coords"];
  return nullptr;
}

}  // namespace detail

inline std::string render_csv(const Report& rep) {
  const auto& doc = rep.doc;
  const std::string command = doc.value("command", std::string{});
  std::ostringstream out;
  auto row = [&](std::initializer_list<Json> cells) {
    bool first = true;
    for (const auto& c : cells) {
      out << (first ? "" : ",") << detail::csv_cell(c);
      first = false;
    }
    out << "\n";
  };
  if (command == "construct") {
    if (rep.family_csv.empty()) throw MalformedInput("construct csv needs the family table (not stored in the JSON)");
    return rep.family_csv;
  }
  if (command == "certify" || command == "sweep") {
    out << "index,resolution,type,value,margin,exclusion_radius,tie_tolerance,location,coeffs\n";
    std::size_t i = 0;
    for (const auto& o : doc["outcomes"]) {
      const Json value = o.contains("value") ? o["value"] : o.value("sampled_max", Json(nullptr));
      row({i++, o["resolution"], o["type"], value, o.value("margin", Json(nullptr)), o["exclusion_radius"],
           o["tie_tolerance"], detail::outcome_location(o), o["coeffs"]});
    }
    return out.str();
  }
  if (command == "probe") {
    const auto& o = doc["outcomes"][0];
    out << "pair,direction,h\n";
    const auto& dirs = o["profile"]["directions"];
    const auto& h = o["profile"]["h"];
    for (std::size_t i = 0; i < h.size(); ++i) row({i, dirs[i], h[i]});
    return out.str();
  }
  if (command == "gdelta") {
    const auto& o = doc["outcomes"][0];
    out << "n,member,witness,witness_index,gap\n";
    for (const auto& r : o["un_table"]) row({r["n"], r["member"], r["witness"], r["witness_index"], r["gap"]});
    return out.str();
  }
  throw MalformedInput("report: unknown command '" + command + "'");
}

}  // namespace unimax
