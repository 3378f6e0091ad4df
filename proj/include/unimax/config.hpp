#pragma once

#include "unimax/errors.hpp"
#include "unimax/geometry.hpp"

#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace unimax {

using Json = nlohmann::ordered_json;

enum class Command { construct, certify, probe, gdelta, sweep };

inline std::string_view to_string(Command c) {
  switch (c) {
    case Command::construct: return "construct";
    case Command::certify: return "certify";
    case Command::probe: return "probe";
    case Command::gdelta: return "gdelta";
    case Command::sweep: return "sweep";
  }
  return "unknown";
}

inline std::optional<Command> command_from_string(std::string_view s) {
  if (s == "construct") return Command::construct;
  if (s == "certify") return Command::certify;
  if (s == "probe") return Command::probe;
  if (s == "gdelta") return Command::gdelta;
  if (s == "sweep") return Command::sweep;
  return std::nullopt;
}

inline const std::vector<std::string>& known_families() {
  static const std::vector<std::string> names{"circle", "real-line", "sphere", "halfline",
                                              "l2",     "polynomial", "csv",  "sampled"};
  return names;
}

struct FamilySpec {
  std::string name;
  Json params = Json::object();
};

struct CoeffSpec {
  std::vector<Vector> values;
  // Sampled coefficients: `count` standard normal vectors from `seed`.
  std::size_t count = 0;
  std::uint64_t seed = 0;

  bool sampled() const noexcept { return values.empty() && count > 0; }
};

struct Tolerances {
  std::optional<double> exclusion_radius;
  std::optional<double> tie_tolerance;
  std::optional<double> collision_tolerance;
};

struct Resolutions {
  std::optional<std::size_t> domain;
  std::size_t sphere = 4096;
  std::vector<std::size_t> sweep;
};

struct GdeltaSpec {
  std::size_t n_max = 8;
  std::optional<double> epsilon;
  std::size_t bump_n = 8;
};

struct OutputSpec {
  std::optional<std::string> json;
  std::optional<std::string> csv;
  std::optional<std::string> svg;
};

struct ExperimentConfig {
  Command command = Command::certify;
  std::uint64_t seed = 0;
  FamilySpec family;
  CoeffSpec coeffs;
  Tolerances tolerances;
  Resolutions resolutions;
  SphereScheme sphere_scheme = SphereScheme::generalized_spiral;
  GdeltaSpec gdelta;
  OutputSpec output;
};

namespace detail {

class DiagnosticSink {
 public:
  void add(std::string field, std::string message) { items_.push_back({std::move(field), std::move(message)}); }
  bool empty() const noexcept { return items_.empty(); }
  void raise_if_any() const {
    if (!items_.empty()) throw ConfigInvalid(items_);
  }

 private:
  std::vector<FieldDiagnostic> items_;
};

inline const Json* find(const Json& obj, std::string_view key) {
  if (!obj.is_object()) return nullptr;
  auto it = obj.find(std::string(key));
  return it == obj.end() || it->is_null() ? nullptr : &*it;
}

inline std::optional<double> read_number(const Json& obj, std::string_view key, const std::string& field,
                                         DiagnosticSink& sink, bool positive) {
  const Json* v = find(obj, key);
  if (!v) return std::nullopt;
  if (!v->is_number()) {
    sink.add(field, "must be a number");
    return std::nullopt;
  }
  const double x = v->get<double>();
  if (!std::isfinite(x) || (positive && !(x > 0.0))) {
    sink.add(field, positive ? "must be a finite number > 0" : "must be finite");
    return std::nullopt;
  }
  return x;
}

inline std::optional<std::uint64_t> read_unsigned(const Json& obj, std::string_view key, const std::string& field,
                                                  DiagnosticSink& sink) {
  const Json* v = find(obj, key);
  if (!v) return std::nullopt;
  if (!v->is_number_unsigned() && !(v->is_number_integer() && v->get<std::int64_t>() >= 0)) {
    sink.add(field, "must be a non-negative integer");
    return std::nullopt;
  }
  return v->get<std::uint64_t>();
}

inline std::optional<Vector> read_vector(const Json& v, const std::string& field, DiagnosticSink& sink) {
  if (!v.is_array() || v.empty()) {
    sink.add(field, "must be a non-empty array of numbers");
    return std::nullopt;
  }
  Vector out;
  for (const auto& x : v) {
    if (!x.is_number() || !std::isfinite(x.get<double>())) {
      sink.add(field, "must contain only finite numbers");
      return std::nullopt;
    }
    out.push_back(x.get<double>());
  }
  return out;
}

}  // namespace detail

// Parses and validates a config document. Every problem found is reported,
// not just the first.
inline ExperimentConfig parse_config(const Json& doc) {
  detail::DiagnosticSink sink;
  ExperimentConfig cfg;
  if (!doc.is_object()) {
    sink.add("(root)", "config must be a JSON object");
    sink.raise_if_any();
  }
  static const std::vector<std::string> allowed{"command",     "seed",          "family", "coeffs",
                                                "tolerances",  "resolutions",   "sphere_scheme",
                                                "gdelta",      "output"};
  for (const auto& [key, _] : doc.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) sink.add(key, "unknown field");
  }

  if (const Json* c = detail::find(doc, "command"); !c || !c->is_string()) {
    sink.add("command", "required; one of construct, certify, probe, gdelta, sweep");
  } else if (auto cmd = command_from_string(c->get<std::string>())) {
    cfg.command = *cmd;
  } else {
    sink.add("command", "unknown command '" + c->get<std::string>() + "'");
  }

  if (auto s = detail::read_unsigned(doc, "seed", "seed", sink)) {
    cfg.seed = *s;
  } else if (!detail::find(doc, "seed")) {
    sink.add("seed", "required (no entropy default)");
  }

  if (const Json* f = detail::find(doc, "family"); !f || !f->is_object()) {
    sink.add("family", "required object with a 'name'");
  } else {
    const Json* name = detail::find(*f, "name");
    if (!name || !name->is_string()) {
      sink.add("family.name", "required string");
    } else {
      cfg.family.name = name->get<std::string>();
      const auto& names = known_families();
      if (std::find(names.begin(), names.end(), cfg.family.name) == names.end()) {
        sink.add("family.name", "unknown family '" + cfg.family.name + "'");
      }
    }
    if (const Json* p = detail::find(*f, "params")) {
      if (!p->is_object()) {
        sink.add("family.params", "must be an object");
      } else {
        cfg.family.params = *p;
      }
    }
  }

  cfg.coeffs.seed = cfg.seed;
  if (const Json* c = detail::find(doc, "coeffs")) {
    if (c->is_array() && !c->empty() && c->front().is_array()) {
      for (std::size_t i = 0; i < c->size(); ++i) {
        if (auto v = detail::read_vector((*c)[i], "coeffs[" + std::to_string(i) + "]", sink)) {
          cfg.coeffs.values.push_back(std::move(*v));
        }
      }
    } else if (c->is_array()) {
      if (auto v = detail::read_vector(*c, "coeffs", sink)) cfg.coeffs.values.push_back(std::move(*v));
    } else if (c->is_object()) {
      const auto count = detail::read_unsigned(*c, "count", "coeffs.count", sink);
      if (!count || *count == 0) {
        if (count || !detail::find(*c, "count")) sink.add("coeffs.count", "required integer >= 1");
      } else {
        cfg.coeffs.count = *count;
      }
      if (auto s = detail::read_unsigned(*c, "seed", "coeffs.seed", sink)) cfg.coeffs.seed = *s;
    } else {
      sink.add("coeffs", "must be a vector, a list of vectors or {count, seed}");
    }
  }
  const bool needs_coeffs = cfg.command == Command::certify || cfg.command == Command::sweep;
  if (needs_coeffs && cfg.coeffs.values.empty() && cfg.coeffs.count == 0 && !detail::find(doc, "coeffs")) {
    sink.add("coeffs", "required for " + std::string(to_string(cfg.command)));
  }

  if (const Json* t = detail::find(doc, "tolerances")) {
    if (!t->is_object()) {
      sink.add("tolerances", "must be an object");
    } else {
      cfg.tolerances.exclusion_radius =
          detail::read_number(*t, "exclusion_radius", "tolerances.exclusion_radius", sink, true);
      cfg.tolerances.tie_tolerance = detail::read_number(*t, "tie_tolerance", "tolerances.tie_tolerance", sink, false);
      if (cfg.tolerances.tie_tolerance && *cfg.tolerances.tie_tolerance < 0.0) {
        sink.add("tolerances.tie_tolerance", "must be >= 0");
      }
      cfg.tolerances.collision_tolerance =
          detail::read_number(*t, "collision_tolerance", "tolerances.collision_tolerance", sink, true);
    }
  }

  if (const Json* r = detail::find(doc, "resolutions")) {
    if (!r->is_object()) {
      sink.add("resolutions", "must be an object");
    } else {
      if (auto d = detail::read_unsigned(*r, "domain", "resolutions.domain", sink)) cfg.resolutions.domain = *d;
      if (auto s = detail::read_unsigned(*r, "sphere", "resolutions.sphere", sink)) {
        if (*s < 4 || *s % 2 != 0) {
          sink.add("resolutions.sphere", "must be even and >= 4");
        } else {
          cfg.resolutions.sphere = *s;
        }
      }
      if (const Json* s = detail::find(*r, "sweep")) {
        if (!s->is_array()) {
          sink.add("resolutions.sweep", "must be an array of integers");
        } else {
          for (const auto& x : *s) {
            if (!x.is_number_integer() || x.get<std::int64_t>() <= 0) {
              sink.add("resolutions.sweep", "must contain positive integers");
              break;
            }
            cfg.resolutions.sweep.push_back(x.get<std::size_t>());
          }
        }
      }
    }
  }

  if (const Json* s = detail::find(doc, "sphere_scheme")) {
    try {
      cfg.sphere_scheme = sphere_scheme_from_string(s->is_string() ? s->get<std::string>() : std::string{});
    } catch (const MalformedInput&) {
      sink.add("sphere_scheme", "must be 'generalized-spiral' or 'random-uniform'");
    }
  }

  if (const Json* g = detail::find(doc, "gdelta")) {
    if (!g->is_object()) {
      sink.add("gdelta", "must be an object");
    } else {
      if (auto v = detail::read_unsigned(*g, "n_max", "gdelta.n_max", sink)) {
        if (*v < 1) sink.add("gdelta.n_max", "must be >= 1");
        cfg.gdelta.n_max = *v;
      }
      if (auto v = detail::read_unsigned(*g, "bump_n", "gdelta.bump_n", sink)) {
        if (*v < 1) sink.add("gdelta.bump_n", "must be >= 1");
        cfg.gdelta.bump_n = *v;
      }
      cfg.gdelta.epsilon = detail::read_number(*g, "epsilon", "gdelta.epsilon", sink, true);
    }
  }

  if (const Json* o = detail::find(doc, "output")) {
    if (!o->is_object()) {
      sink.add("output", "must be an object");
    } else {
      for (const char* key : {"json", "csv", "svg"}) {
        const Json* p = detail::find(*o, key);
        if (!p) continue;
        if (!p->is_string() || p->get<std::string>().empty()) {
          sink.add(std::string("output.") + key, "must be a non-empty path");
          continue;
        }
        auto& slot = std::string_view(key) == "json" ? cfg.output.json
                     : std::string_view(key) == "csv" ? cfg.output.csv
                                                      : cfg.output.svg;
        slot = p->get<std::string>();
      }
    }
  }
  sink.raise_if_any();
  return cfg;
}

// Normalized echo of a parsed config; parse_config(config_to_json(c)) == c.
inline Json config_to_json(const ExperimentConfig& cfg) {
  Json j;
  j["command"] = to_string(cfg.command);
  j["seed"] = cfg.seed;
  j["family"] = {{"name", cfg.family.name}, {"params", cfg.family.params}};
  if (cfg.coeffs.sampled()) {
    j["coeffs"] = {{"count", cfg.coeffs.count}, {"seed", cfg.coeffs.seed}};
  } else if (!cfg.coeffs.values.empty()) {
    j["coeffs"] = cfg.coeffs.values;
  }
  Json tol = Json::object();
  if (cfg.tolerances.exclusion_radius) tol["exclusion_radius"] = *cfg.tolerances.exclusion_radius;
  if (cfg.tolerances.tie_tolerance) tol["tie_tolerance"] = *cfg.tolerances.tie_tolerance;
  if (cfg.tolerances.collision_tolerance) tol["collision_tolerance"] = *cfg.tolerances.collision_tolerance;
  j["tolerances"] = tol;
  Json res = Json::object();
  if (cfg.resolutions.domain) res["domain"] = *cfg.resolutions.domain;
  res["sphere"] = cfg.resolutions.sphere;
  if (!cfg.resolutions.sweep.empty()) res["sweep"] = cfg.resolutions.sweep;
  j["resolutions"] = res;
  j["sphere_scheme"] = to_string(cfg.sphere_scheme);
  Json g = {{"n_max", cfg.gdelta.n_max}, {"bump_n", cfg.gdelta.bump_n}};
  if (cfg.gdelta.epsilon) g["epsilon"] = *cfg.gdelta.epsilon;
  j["gdelta"] = g;
  Json out = Json::object();
  if (cfg.output.json) out["json"] = *cfg.output.json;
  if (cfg.output.csv) out["csv"] = *cfg.output.csv;
  if (cfg.output.svg) out["svg"] = *cfg.output.svg;
  j["output"] = out;
  return j;
}

}  // namespace unimax
