#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include "devroll/io.hpp"
#include "devroll/leaf.hpp"
#include "devroll/scenario.hpp"

namespace fs = std::filesystem;
namespace sc = devroll::scenario;
using json = nlohmann::json;

namespace {

const fs::path kScenarios = DEVROLL_SCENARIO_DIR;

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("devroll_cli_test_" + std::to_string(::getpid())) / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream s;
  s << f.rdbuf();
  return s.str();
}

json load(const std::string& name) { return json::parse(slurp(kScenarios / name)); }

sc::RunResult run(const json& j, const std::string& dir) {
  sc::RunOptions o;
  o.out_dir = scratch(dir);
  return sc::run(j, o);
}

int shell(const std::string& cmd) {
  const int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream s(line);
  for (std::string cell; std::getline(s, cell, ',');) out.push_back(cell);
  return out;
}

std::string last_line(const std::string& text) {
  const auto end = text.find_last_not_of('\n');
  const auto start = text.rfind('\n', end);
  return text.substr(start == std::string::npos ? 0 : start + 1, end - (start == std::string::npos ? 0 : start + 1) + 1);
}

}  // namespace

TEST_CASE("euclidean geodesic scenario") {
  const auto r = run(load("geodesic_euclidean.json"), "geo");
  CHECK(r.exit_code == sc::ok);
  const fs::path dir = fs::temp_directory_path() / ("devroll_cli_test_" + std::to_string(::getpid())) / "geo";
  const std::string csv = slurp(dir / "trajectory.csv");
  CHECK(csv.rfind("t,x0,x1\n", 0) == 0);
  const auto cells = split(last_line(csv));
  REQUIRE(cells.size() == 3);
  CHECK(std::stod(cells[0]) == 1.0);
  CHECK(std::abs(std::stod(cells[1]) - 1.5) <= 1e-12);
  CHECK(std::abs(std::stod(cells[2]) - 1.0) <= 1e-12);
  const json rep = json::parse(slurp(dir / "report.json"));
  CHECK(rep["passed"] == true);
  CHECK(rep["gates"][0]["name"] == "gram_drift");
  CHECK(rep["artifacts"].size() == 2);
  for (const auto& e : fs::directory_iterator(dir)) CHECK(e.path().filename().string().find("tmp") == std::string::npos);
}

TEST_CASE("strict schema") {
  json j = load("geodesic_euclidean.json");
  j["integrator"] = {{"stepp", 1e-3}};
  auto r = run(j, "typo");
  CHECK(r.exit_code == sc::invalid_input);
  CHECK(r.message.find("stepp") != std::string::npos);

  j = load("geodesic_euclidean.json");
  j["params"]["horizn"] = 1;
  r = run(j, "typo2");
  CHECK(r.exit_code == sc::invalid_input);
  CHECK(r.message.find("params.horizn") != std::string::npos);

  j = load("geodesic_euclidean.json");
  j["schema"] = 2;
  CHECK(run(j, "schema").exit_code == sc::invalid_input);
  j.erase("schema");
  CHECK(run(j, "schema").exit_code == sc::invalid_input);

  j = load("geodesic_euclidean.json");
  j["command"] = "teleport";
  CHECK(run(j, "cmd").exit_code == sc::invalid_input);

  j = load("geodesic_euclidean.json");
  j["gates"] = {{"spread", {{"max", 1.0}}}};
  CHECK(run(j, "gate").exit_code == sc::invalid_input);

  j = load("geodesic_euclidean.json");
  j["params"]["velocity"] = {1.0};
  CHECK(run(j, "dim").exit_code == sc::invalid_input);

  j = load("develop_broken_geodesic.json");
  j["params"]["curve"] = {{"kind", "expr"}, {"components", {"sin(t", "1"}}, {"horizon", 1}};
  r = run(j, "expr");
  CHECK(r.exit_code == sc::invalid_input);
  CHECK(r.message.find("offset") != std::string::npos);

  j = load("demo_counterexample_half.json");
  j["manifold"] = {{"kind", "builtin"}, {"name", "euclidean"}, {"params", {{"n", 2}}}};
  CHECK(run(j, "demo").exit_code == sc::invalid_input);

  sc::RunOptions o;
  o.out_dir = scratch("missing");
  CHECK(sc::run_file(kScenarios / "does_not_exist.json", o).exit_code == sc::invalid_input);
}

TEST_CASE("gate failures still write the report") {
  const auto r = run(load("cah_welldefined_sphere_to_plane.json"), "neg");
  CHECK(r.exit_code == sc::gate_failed);
  CHECK(r.message.find("spread") != std::string::npos);
  CHECK(r.report["passed"] == false);
  CHECK(r.report["spread"].get<double>() > 1e-2);

  json j = load("variation_sphere_jacobi.json");
  j["gates"] = {{"oracle_difference", {{"max", 1e-300}}}};
  CHECK(run(j, "tight").exit_code == sc::gate_failed);
}

TEST_CASE("numerical failures map to exit 3") {
  json j = {{"schema", 1},
            {"command", "geodesic"},
            {"manifold", {{"kind", "expr"}, {"dim", 2}, {"g", json::array({json::array({"1", "0"}), json::array({"0", "x0^2"})})}, {"domain", "x0 > 0"}}},
            {"params", {{"point", {1.0, 0.3}}, {"velocity", {-1.0, 0.0}}, {"horizon", 2.0}}}};
  const auto r = run(j, "chart");
  INFO(r.message);
  CHECK(r.exit_code == sc::numerical_failure);
  CHECK(r.message.find("left_chart") != std::string::npos);
  CHECK(r.report["status"] == "left_chart");
}

TEST_CASE("every example scenario runs") {
  for (const auto& e : fs::directory_iterator(kScenarios)) {
    const std::string name = e.path().filename().string();
    if (name.find("demo_counterexample_golden") != std::string::npos) continue;  // covered below
    INFO(name);
    const auto r = run(load(name), "all_" + e.path().stem().string());
    const int expected = name == "cah_welldefined_sphere_to_plane.json" ? sc::gate_failed : sc::ok;
    CHECK(r.exit_code == expected);
  }
}

TEST_CASE("demo counterexample report") {
  const auto r = run(load("demo_counterexample_golden.json"), "demo_golden");
  CHECK(r.exit_code == sc::ok);
  REQUIRE(r.report.contains("min_return_distance"));
  REQUIRE(r.report.contains("coverage_fraction"));
  CHECK(r.report["orbit_closes"] == false);

  // independent leaf trace with the same parameters
  const double g = 0.6180339887498949;
  const auto st = devroll::catalog::slab_torus(g);
  const auto [t1, t2] = devroll::slab_torus_distributions(g);
  const devroll::Vec p{{0.5, 0.0, 0.0}};
  const double n = std::sqrt(1.0 + g * g);
  const auto leaf = devroll::leaf_trace(st, t2, devroll::TangentCurve::constant(p, devroll::Vec{{0.0, -g / n, 1.0 / n}}, 200.0));
  CHECK(r.report["min_return_distance"].get<double>() == doctest::Approx(leaf.min_return_distance).epsilon(1e-9));
  CHECK(r.report["coverage_fraction"].get<double>() == doctest::Approx(leaf.coverage_fraction));
}

TEST_CASE("artifacts are byte-identical across runs") {
  for (const char* name : {"parallelogram_sphere_line.json", "curvature_split_sphere_hyperbolic.json",
                           "derham_slab_torus.json", "variation_sphere_jacobi.json"}) {
    INFO(name);
    const auto a = run(load(name), std::string("det_a_") + name);
    const auto b = run(load(name), std::string("det_b_") + name);
    REQUIRE(a.artifacts == b.artifacts);
    const fs::path base = fs::temp_directory_path() / ("devroll_cli_test_" + std::to_string(::getpid()));
    for (const auto& f : a.artifacts)
      CHECK(slurp(base / (std::string("det_a_") + name) / f) == slurp(base / (std::string("det_b_") + name) / f));
  }
}

TEST_CASE("seed changes the random probes") {
  json j = load("curvature_split_sphere_hyperbolic.json");
  const auto a = run(j, "seed_a");
  j["seed"] = 7;
  const auto b = run(j, "seed_b");
  CHECK(a.exit_code == sc::ok);
  CHECK(b.exit_code == sc::ok);
  CHECK(a.report["split_residual"] != b.report["split_residual"]);
}

TEST_CASE("number formatting") {
  using devroll::io::format_double;
  CHECK(format_double(0.1) == "0.10000000000000001");
  CHECK(format_double(1.0) == "1");
  CHECK(std::stod(format_double(M_PI)) == M_PI);
  CHECK(devroll::io::to_json_text(json{{"x", std::nan("")}}).find("null") != std::string::npos);
}

TEST_CASE("command-line front end") {
  const std::string cli = DEVROLL_CLI;
  const fs::path out = scratch("bin");
  const std::string q = " > " + (out / "stdout.txt").string() + " 2> " + (out / "stderr.txt").string();
  CHECK(shell(cli + " run " + (kScenarios / "geodesic_euclidean.json").string() + " --out " + out.string() + q) == 0);
  CHECK(slurp(out / "stdout.txt").find("geodesic ok") != std::string::npos);
  CHECK(fs::exists(out / "trajectory.csv"));

  CHECK(shell(cli + " run " + (kScenarios / "geodesic_euclidean.json").string() + " --quiet --frames --out " +
              out.string() + q) == 0);
  CHECK(slurp(out / "stdout.txt").empty());
  CHECK(slurp(out / "trajectory.csv").rfind("t,x0,x1,f00,f01,f10,f11\n", 0) == 0);

  std::ofstream(out / "typo.json") << R"({"schema":1,"command":"geodesic","integrator":{"stepp":0.001},)"
                                   << R"("manifold":{"kind":"builtin","name":"euclidean","params":{"n":2}},)"
                                   << R"("params":{"point":[0,0],"velocity":[1,0],"horizon":1}})";
  CHECK(shell(cli + " run " + (out / "typo.json").string() + " --out " + out.string() + q) == 2);
  const std::string err = slurp(out / "stderr.txt");
  CHECK(err.find("stepp") != std::string::npos);
  CHECK(std::count(err.begin(), err.end(), '\n') == 1);

  std::ofstream(out / "broken.json") << "{\"schema\": 1,";
  CHECK(shell(cli + " run " + (out / "broken.json").string() + " --out " + out.string() + q) == 2);
  CHECK(shell(cli + " run" + q) == 2);
  CHECK(shell(cli + " run " + (kScenarios / "cah_welldefined_sphere_to_plane.json").string() + " --out " +
              out.string() + q) == 1);
}

TEST_CASE("zz cleanup") {
  fs::remove_all(fs::temp_directory_path() / ("devroll_cli_test_" + std::to_string(::getpid())));
}
