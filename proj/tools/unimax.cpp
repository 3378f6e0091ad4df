// Command-line front end: builds a config from flags (a --config file wins
// over flags), runs it and writes the report.
#include "unimax/unimax.hpp"

#include "CLI11.hpp"

#include <fstream>
#include <iostream>
#include <sstream>

namespace {

unimax::Json parse_scalar(const std::string& text) {
  try {
    return unimax::Json::parse(text);
  } catch (const unimax::Json::parse_error&) {
    return text;
  }
}

// "1,2,2" is one vector; "1,0;0,1" is a list of vectors.
unimax::Json parse_coeffs(const std::string& text) {
  auto vec = [](const std::string& part) {
    unimax::Json v = unimax::Json::array();
    std::stringstream ss(part);
    std::string cell;
    while (std::getline(ss, cell, ',')) v.push_back(parse_scalar(cell));
    return v;
  };
  if (text.find(';') == std::string::npos) return vec(text);
  unimax::Json list = unimax::Json::array();
  std::stringstream ss(text);
  std::string part;
  while (std::getline(ss, part, ';')) list.push_back(vec(part));
  return list;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Unique-maximum certification and nonlinearity probing for sampled function families"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string family;
  std::vector<std::string> params;
  std::string coeffs;
  std::optional<std::size_t> count;
  std::optional<std::uint64_t> coeff_seed;
  std::optional<double> exclusion_radius, tie_tolerance, collision_tolerance, epsilon;
  std::optional<std::size_t> domain_resolution, sphere_resolution, n_max, bump_n;
  std::vector<std::size_t> sweep_resolutions;
  std::string scheme;
  std::string json_out, csv_out, svg_out;
  std::size_t threads = 1;
  bool strict = false;

  app.add_option("--config", config_path, "JSON config; its fields override flags");
  app.add_option("--seed", seed, "master seed (required)");
  app.add_option("--family", family, "circle | real-line | sphere | halfline | l2 | polynomial | csv | sampled");
  app.add_option("--param", params, "family parameter key=value (value parsed as JSON)");
  app.add_option("--coeffs", coeffs, "coefficients: 1,2,2 or 1,0;0,1");
  app.add_option("--count", count, "number of sampled coefficient vectors");
  app.add_option("--coeff-seed", coeff_seed, "seed for sampled coefficients (default: --seed)");
  app.add_option("--exclusion-radius", exclusion_radius);
  app.add_option("--tie-tolerance", tie_tolerance);
  app.add_option("--collision-tolerance", collision_tolerance);
  app.add_option("--domain-resolution", domain_resolution);
  app.add_option("--sphere-resolution", sphere_resolution);
  app.add_option("--sweep-resolutions", sweep_resolutions)->delimiter(',');
  app.add_option("--sphere-scheme", scheme, "generalized-spiral | random-uniform");
  app.add_option("--n-max", n_max, "gdelta: largest n of the U_n table");
  app.add_option("--epsilon", epsilon, "gdelta: bump height");
  app.add_option("--bump-n", bump_n, "gdelta: n for the bumped membership check");
  app.add_option("--json", json_out, "write the JSON report here (default: stdout)");
  app.add_option("--csv", csv_out, "write the CSV table here");
  app.add_option("--svg", svg_out, "write the SVG plot here");
  app.add_option("--threads", threads, "worker threads (0 = all cores); never changes results");
  app.add_flag("--strict", strict, "exit 3 when any outcome is inconclusive");

  std::string command;
  for (const char* verb : {"construct", "certify", "probe", "gdelta", "sweep"}) {
    app.add_subcommand(verb)->fallthrough()->callback([&command, verb] { command = verb; });
  }
  CLI11_PARSE(app, argc, argv);

  using unimax::Json;
  Json doc = Json::object();
  doc["command"] = command;
  if (seed) doc["seed"] = *seed;
  if (!family.empty() || !params.empty()) {
    doc["family"]["name"] = family;
    Json p = Json::object();
    for (const auto& kv : params) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) {
        std::cerr << "--param expects key=value, got '" << kv << "'\n";
        return 2;
      }
      p[kv.substr(0, eq)] = parse_scalar(kv.substr(eq + 1));
    }
    doc["family"]["params"] = p;
  }
  if (!coeffs.empty()) {
    doc["coeffs"] = parse_coeffs(coeffs);
  } else if (count || coeff_seed) {
    doc["coeffs"] = Json::object();
    if (count) doc["coeffs"]["count"] = *count;
    if (coeff_seed) doc["coeffs"]["seed"] = *coeff_seed;
  }
  if (exclusion_radius) doc["tolerances"]["exclusion_radius"] = *exclusion_radius;
  if (tie_tolerance) doc["tolerances"]["tie_tolerance"] = *tie_tolerance;
  if (collision_tolerance) doc["tolerances"]["collision_tolerance"] = *collision_tolerance;
  if (domain_resolution) doc["resolutions"]["domain"] = *domain_resolution;
  if (sphere_resolution) doc["resolutions"]["sphere"] = *sphere_resolution;
  if (!sweep_resolutions.empty()) doc["resolutions"]["sweep"] = sweep_resolutions;
  if (!scheme.empty()) doc["sphere_scheme"] = scheme;
  if (n_max) doc["gdelta"]["n_max"] = *n_max;
  if (epsilon) doc["gdelta"]["epsilon"] = *epsilon;
  if (bump_n) doc["gdelta"]["bump_n"] = *bump_n;
  if (!json_out.empty()) doc["output"]["json"] = json_out;
  if (!csv_out.empty()) doc["output"]["csv"] = csv_out;
  if (!svg_out.empty()) doc["output"]["svg"] = svg_out;

  try {
    if (!config_path.empty()) {
      std::ifstream in(config_path);
      if (!in) throw unimax::ConfigInvalid("--config", "cannot open '" + config_path + "'");
      Json file;
      try {
        file = Json::parse(in);
      } catch (const Json::parse_error& e) {
        throw unimax::ConfigInvalid("--config", e.what());
      }
      doc.merge_patch(file);
    }
    const auto cfg = unimax::parse_config(doc);
    const auto report = unimax::run(cfg, unimax::Parallelism{threads});
    if (cfg.output.json) {
      unimax::emit(report, unimax::Format::json, *cfg.output.json);
    } else {
      std::cout << unimax::render_json(report);
    }
    if (cfg.output.csv) unimax::emit(report, unimax::Format::csv, *cfg.output.csv);
    if (cfg.output.svg) unimax::emit(report, unimax::Format::svg, *cfg.output.svg);
    if (strict && report.inconclusive() > 0) {
      std::cerr << report.inconclusive() << " inconclusive outcome(s)\n";
      return 3;
    }
  } catch (const unimax::ConfigInvalid& e) {
    std::cerr << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
