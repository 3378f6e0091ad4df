#include "unimax/unimax.hpp"

#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <regex>
#include <sstream>

using namespace unimax;
namespace fs = std::filesystem;

namespace {

Json sphere_certify() {
  return Json::parse(R"({"command": "certify", "seed": 1, "family": {"name": "sphere", "params": {"n": 3}},
                         "coeffs": [1, 2, 2], "resolutions": {"domain": 20000}})");
}

Json quadratic_probe() {
  return Json::parse(R"({"command": "probe", "seed": 2,
                         "family": {"name": "polynomial", "params": {"generators": [[0, 1], [0, 0, 1]]}},
                         "resolutions": {"domain": 10001, "sphere": 512}})");
}

Json circle_certify() {
  return Json::parse(R"({"command": "certify", "seed": 3, "family": {"name": "circle"}, "coeffs": [1, 0]})");
}

std::vector<std::string> field_names(const ConfigInvalid& e) {
  std::vector<std::string> out;
  for (const auto& d : e.diagnostics()) out.push_back(d.field);
  return out;
}

std::size_t count_of(const std::string& s, const std::string& needle) {
  std::size_t n = 0;
  for (auto p = s.find(needle); p != std::string::npos; p = s.find(needle, p + 1)) ++n;
  return n;
}

fs::path scratch(const std::string& name) {
  auto dir = fs::temp_directory_path() / ("unimax_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(UNIMAX_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

Json read_json(const fs::path& p) {
  std::ifstream in(p);
  return Json::parse(in);
}

}  // namespace

TEST(Run, SphereCertificate) {
  const auto rep = run(sphere_certify());
  EXPECT_EQ(rep.doc["schema"], "unimax/1");
  EXPECT_EQ(rep.doc["command"], "certify");
  const auto& o = rep.doc["outcomes"][0];
  ASSERT_EQ(o["type"], "unique-max-certificate");
  const auto loc = o["location"]["coords"].get<Vector>();
  EXPECT_NEAR(loc[0], 1.0 / 3.0, 1e-6);
  EXPECT_NEAR(loc[1], 2.0 / 3.0, 1e-6);
  EXPECT_NEAR(loc[2], 2.0 / 3.0, 1e-6);
  EXPECT_NEAR(o["value"].get<double>(), 3.0, 1e-10);
  EXPECT_NEAR(o["closed_form"]["value"].get<double>(), 3.0, 1e-15);
  EXPECT_EQ(rep.inconclusive(), 0u);
}

TEST(Run, QuadraticProbe) {
  const auto rep = run(quadratic_probe());
  EXPECT_EQ(rep.doc["outcomes"][0]["type"], "collision-witness");
  EXPECT_EQ(rep.doc["outcomes"][0]["kind"], "non-unique-combination");
  EXPECT_EQ(rep.doc["summary"]["witness"], true);
}

TEST(Run, GdeltaSine) {
  const auto dir = scratch("gdelta");
  const auto f = SampledFunction01::from_function([](double t) { return std::sin(std::numbers::pi * t); }, 1001);
  {
    std::ofstream out(dir / "sin.csv");
    write_sampled_csv(f, out);
  }
  Json cfg = {{"command", "gdelta"}, {"seed", 4}, {"family", {{"name", "sampled"}, {"params", {{"path", (dir / "sin.csv").string()}}}}},
              {"gdelta", {{"n_max", 8}, {"epsilon", 0.01}}}};
  const auto rep = run(cfg);
  const auto& o = rep.doc["outcomes"][0];
  EXPECT_EQ(o["consistency"]["verdict"], "agree");
  EXPECT_EQ(o["un_table"].size(), 7u);
  EXPECT_EQ(o["un_table"][0]["witness"], 0.5);
  EXPECT_EQ(o["bump"]["member"], true);
  EXPECT_LE(o["bump"]["sup_distance"].get<double>(), 0.01);
}

TEST(Run, ConstructCircle) {
  const auto rep = run(Json::parse(R"({"command": "construct", "seed": 0, "family": {"name": "circle"},
                                        "resolutions": {"domain": 64}})"));
  EXPECT_EQ(rep.doc["family"]["domain"]["size"], 64);
  EXPECT_EQ(rep.doc["plot"]["series"].size(), 2u);
  EXPECT_EQ(count_of(rep.family_csv, "\n"), 65u);
}

TEST(Config, UnknownFamily) {
  auto cfg = circle_certify();
  cfg["family"]["name"] = "torus";
  EXPECT_THROW(run(cfg), ConfigInvalid);
}

TEST(Config, SeedIsMandatory) {
  auto cfg = circle_certify();
  cfg.erase("seed");
  try {
    parse_config(cfg);
    FAIL();
  } catch (const ConfigInvalid& e) {
    EXPECT_EQ(field_names(e), std::vector<std::string>{"seed"});
  }
}

TEST(Config, CollectsEveryDiagnostic) {
  const auto cfg = Json::parse(R"({"command": "certify", "family": {"name": "circle"}, "colour": 1,
                                    "tolerances": {"exclusion_radius": -1}, "resolutions": {"sphere": 7}})");
  try {
    parse_config(cfg);
    FAIL();
  } catch (const ConfigInvalid& e) {
    const auto f = field_names(e);
    for (const char* want : {"colour", "seed", "coeffs", "tolerances.exclusion_radius", "resolutions.sphere"}) {
      EXPECT_NE(std::find(f.begin(), f.end(), want), f.end()) << want;
    }
  }
}

TEST(Config, CoefficientLengthMustMatchTheFamily) {
  auto cfg = circle_certify();
  cfg["coeffs"] = {1, 2, 3};
  EXPECT_THROW(run(cfg), ConfigInvalid);
  cfg["coeffs"] = {0, 0};
  EXPECT_THROW(run(cfg), ConfigInvalid);
}

TEST(Config, EchoRoundTrips) {
  for (const auto& doc : {sphere_certify(), quadratic_probe(), circle_certify()}) {
    const auto cfg = parse_config(doc);
    const auto echo = config_to_json(cfg);
    EXPECT_EQ(config_to_json(parse_config(echo)), echo);
  }
}

TEST(Emit, JsonRoundTrip) {
  const auto rep = run(circle_certify());
  std::istringstream in(render_json(rep));
  const auto back = read_report(in);
  EXPECT_EQ(back.doc, rep.doc);
  EXPECT_EQ(render_json(back), render_json(rep));
  std::istringstream bad(R"({"schema": "other"})");
  EXPECT_THROW(read_report(bad), MalformedInput);
}

TEST(Emit, CircleSvgHasOneCurveAndTheArgmax) {
  const auto rep = run(circle_certify());
  const auto svg = render_svg(rep);
  EXPECT_EQ(count_of(svg, "class=\"series\""), 1u);
  EXPECT_EQ(count_of(svg, "class=\"marker\""), 1u);
  const auto& markers = rep.doc["plot"]["markers"];
  ASSERT_EQ(markers.size(), 1u);
  EXPECT_NEAR(markers[0]["x"].get<double>(), std::numbers::pi / 2.0, 1e-8);
  // Rendering a re-read report draws the same picture.
  std::istringstream in(render_json(rep));
  EXPECT_EQ(render_svg(read_report(in)), svg);
}

TEST(Emit, HigherDimensionalSphereIsUnsupported) {
  const auto rep = run(Json::parse(R"({"command": "certify", "seed": 5, "family": {"name": "sphere", "params": {"n": 4}},
                                        "coeffs": [1, 0, 0, 0], "resolutions": {"domain": 2000}})"));
  EXPECT_THROW(render_svg(rep), UnsupportedPlot);
}

TEST(Emit, ProbeSvgAndCsv) {
  const auto rep = run(quadratic_probe());
  EXPECT_NO_THROW(render_svg(rep));
  const auto csv = render_csv(rep);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "pair,direction,h");
  EXPECT_EQ(count_of(csv, "\n"), 257u);
}

TEST(Emit, CsvHeaders) {
  EXPECT_EQ(render_csv(run(circle_certify())).substr(0, 9), "index,res");
  auto sweep = circle_certify();
  sweep["command"] = "sweep";
  sweep["resolutions"] = {{"sweep", {256, 1024}}};
  sweep["coeffs"] = {{"count", 3}};
  const auto rep = run(sweep);
  EXPECT_EQ(rep.doc["outcomes"].size(), 6u);
  EXPECT_EQ(count_of(render_csv(rep), "\n"), 7u);
  EXPECT_THROW(render_svg(rep), UnsupportedPlot);
}

TEST(Emit, AtomicWriteLeavesNoTemporary) {
  const auto dir = scratch("atomic");
  const auto target = dir / "nested" / "report.json";
  emit(run(circle_certify()), Format::json, target);
  EXPECT_TRUE(fs::exists(target));
  for (const auto& e : fs::recursive_directory_iterator(dir)) EXPECT_NE(e.path().extension(), ".tmp");
}

TEST(Determinism, IdenticalModuloTiming) {
  for (const auto& doc : {sphere_certify(), quadratic_probe()}) {
    const auto a = run(doc, Parallelism{1});
    const auto b = run(doc, Parallelism{4});
    EXPECT_EQ(without_timing(a).dump(), without_timing(b).dump());
    EXPECT_TRUE(a.doc.contains("timing"));
  }
}

TEST(Cli, ExitCodes) {
  const auto dir = scratch("cli");
  const auto out = (dir / "r.json").string();
  EXPECT_EQ(run_cli("certify --seed 1 --family circle --coeffs 1,0 --json " + out), 0);
  EXPECT_EQ(read_json(out)["outcomes"][0]["type"], "unique-max-certificate");
  EXPECT_EQ(run_cli("certify --family circle --coeffs 1,0"), 2);
  EXPECT_EQ(run_cli("certify --seed 1 --family torus --coeffs 1,0"), 2);
  EXPECT_EQ(run_cli("certify --seed 1 --family circle --coeffs 1,0 --exclusion-radius 100 --json " + out), 0);
  EXPECT_EQ(run_cli("certify --seed 1 --family circle --coeffs 1,0 --exclusion-radius 100 --strict --json " + out), 3);
  EXPECT_EQ(read_json(out)["summary"]["inconclusive"], 1);
}

TEST(Cli, ConfigOverridesFlags) {
  const auto dir = scratch("cli_config");
  {
    std::ofstream cfg(dir / "c.json");
    cfg << R"({"command": "certify", "seed": 9, "family": {"name": "circle"}, "coeffs": [0, 1]})";
  }
  const auto out = dir / "r.json";
  EXPECT_EQ(run_cli("certify --seed 1 --family circle --coeffs 1,0 --config " + (dir / "c.json").string() +
                    " --json " + out.string() + " --svg " + (dir / "p.svg").string()),
            0);
  const auto rep = read_json(out);
  EXPECT_EQ(rep["config"]["seed"], 9);
  EXPECT_NEAR(rep["outcomes"][0]["location"]["parameter"].get<double>(), 0.0, 1e-8);
  EXPECT_TRUE(fs::exists(dir / "p.svg"));
  for (const auto& e : fs::directory_iterator(dir)) EXPECT_NE(e.path().extension(), ".tmp");
}

TEST(Cli, UnsupportedPlotIsAnError) {
  const auto dir = scratch("cli_svg");
  EXPECT_EQ(run_cli("certify --seed 1 --family sphere --param n=4 --coeffs 1,0,0,0 --domain-resolution 2000 --svg " +
                    (dir / "p.svg").string()),
            1);
  EXPECT_FALSE(fs::exists(dir / "p.svg"));
}
