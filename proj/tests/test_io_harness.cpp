#include <cstdlib>
#include <functional>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "doctest.h"
#include "vanish/errors.hpp"
#include "vanish/harness.hpp"
#include "vanish/spec_io.hpp"

using namespace vanish;
namespace fs = std::filesystem;

namespace {

const std::string kExamples = VANISH_EXAMPLES;

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("vanish_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void write(const fs::path& p, const std::string& text) { std::ofstream(p, std::ios::binary) << text; }

std::string error_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const ValidationError& e) {
    return e.what();
  }
  return "";
}

int cli(const std::string& args) {
  const std::string cmd = std::string(VANISH_CLI) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

const char* kGame = R"(states: [s0, s1]
actions1: [a0]
actions2: [b0, b1]
payoff:
  - [[1.0, -1.0]]
  - [[0.5, 0.25]]
rates:
  - - [[-1.0, 1.0], [0.5, -0.5]]
    - [[0.0, 0.0], [0.0, 0.0]]
evaluation: {kind: exponential, rho: 2.0}
)";

}  // namespace

TEST_CASE("game spec parsing") {
  const GameSpec g = parse_game_spec(kGame);
  CHECK(g.num_states() == 2);
  CHECK(g.num_actions2() == 2);
  CHECK(g.payoff(1, 0, 1) == 0.25);
  CHECK(g.rates(0, 0).matrix()(1, 0) == 0.5);
  CHECK(g.evaluation().rho() == 2.0);

  const GameSpec a = load_game_spec(kExamples + "/game_3state.yaml");
  CHECK(a.num_states() == 3);
  CHECK_FALSE(validate(a));
}

TEST_CASE("parse errors carry the line") {
  std::string bad_rate = kGame;
  bad_rate.replace(bad_rate.find("[0.5, -0.5]"), 11, "[0.5, -0.4]");
  const std::string e1 = error_of([&] { parse_game_spec(bad_rate, "g.yaml"); });
  CHECK(e1.rfind("g.yaml:8: ", 0) == 0);
  CHECK(e1.find("row 1") != std::string::npos);

  std::string bad_number = kGame;
  bad_number.replace(bad_number.find("0.25"), 4, "abc");
  const std::string e2 = error_of([&] { parse_game_spec(bad_number, "g.yaml"); });
  CHECK(e2.rfind("g.yaml:6: ", 0) == 0);

  const std::string e3 = error_of([] { parse_game_spec("states: [s0\nactions1: [", "x.yaml"); });
  CHECK(e3.rfind("x.yaml:", 0) == 0);

  std::string short_payoff = kGame;
  short_payoff.replace(short_payoff.find("  - [[0.5, 0.25]]\n"), 18, "");
  CHECK_FALSE(error_of([&] { parse_game_spec(short_payoff); }).empty());

  CHECK_THROWS_AS(load_game_spec(kExamples + "/does_not_exist.yaml"), ValidationError);
}

TEST_CASE("json is accepted") {
  const std::string json = R"({"states": ["s"], "actions1": ["a", "b"], "actions2": ["c"],
    "payoff": [[[1], [2]]], "rates": [[[[0]]], [[[0]]]],
    "evaluation": {"kind": "tabulated", "knots": [0, 1], "densities": [2, 0]}})";
  const GameSpec g = parse_game_spec(json);
  CHECK(g.payoff(0, 1, 0) == 2.0);
  CHECK_FALSE(g.evaluation().is_exponential());
}

TEST_CASE("matrix and differential-game files") {
  const Matrix m = load_matrix(kExamples + "/matrix_rps.yaml");
  CHECK(m.rows() == 3);
  CHECK(parse_matrix("[[1, 2], [3, 4]]")(1, 0) == 3.0);
  CHECK(parse_matrix("matrix: [[1, 2]]")(0, 1) == 2.0);
  CHECK_THROWS_AS(parse_matrix("[[1, 2], [3]]"), ValidationError);

  for (const char* name : {"/drift_1d.yaml", "/linear_1d.yaml", "/matching_pennies.yaml", "/pursuit_2d.yaml"}) {
    const auto g = load_diffgame_spec(kExamples + name);
    CHECK_FALSE(diffgame::validate(g));
  }
  const std::string e = error_of([] {
    parse_diffgame_spec("actions1: [a]\nactions2: [b]\nbox: {lower: [0], upper: [1]}\ndynamics: {family: warp}\n"
                        "payoff: [[0]]\nevaluation: {kind: exponential, rho: 1}\n",
                        "d.yaml");
  });
  CHECK(e.rfind("d.yaml:4: ", 0) == 0);
}

TEST_CASE("config parsing and checks") {
  const auto c = harness::parse_config("deltas: [0.2, 0.1]\nresolutions: [8, 16]\nrho: 0.5\nsolver: guarantee\n");
  CHECK(c.deltas == std::vector<double>{0.2, 0.1});
  CHECK(c.rhos == std::vector<double>{0.5});
  CHECK(c.solver == "guarantee");
  CHECK_NOTHROW(harness::check(c));

  const std::string e = error_of([] { harness::parse_config("seed: 1\ndeltas: [0.1, 0.2]\n", "c.yaml"); });
  CHECK(e.rfind("c.yaml:2: ", 0) == 0);
  CHECK(error_of([] { harness::parse_config("tolerance: 0\n", "c.yaml"); }).rfind("c.yaml:1: ", 0) == 0);
  CHECK(error_of([] { harness::parse_config("seed: 1\nbogus: 3\n", "c.yaml"); }).rfind("c.yaml:2: ", 0) == 0);

  harness::ExperimentConfig bad = c;
  bad.deltas.clear();
  CHECK_THROWS_AS(harness::check(bad), ValidationError);
  bad = c;
  bad.solver = "nope";
  CHECK_THROWS_AS(harness::check(bad), ValidationError);
  bad = c;
  bad.rhos = {-1.0};
  CHECK_THROWS_AS(harness::check(bad), ValidationError);
  bad = c;
  bad.deltas = {0.1, 0.1};
  CHECK_THROWS_AS(harness::check(bad), ValidationError);
}

TEST_CASE("csv helpers and hashing") {
  CHECK(harness::csv_field("plain") == "plain");
  CHECK(harness::csv_field("a,b") == "\"a,b\"");
  CHECK(harness::csv_field("say \"hi\"") == "\"say \"\"hi\"\"\"");
  CHECK(harness::csv_field("two\nlines") == "\"two\nlines\"");
  CHECK(std::stod(harness::csv_number(0.1)) == 0.1);
  CHECK(std::stod(harness::csv_number(1.0 / 3.0)) == 1.0 / 3.0);
  CHECK(harness::fnv1a("") == 0xcbf29ce484222325ull);
  CHECK(harness::fnv1a("a") == 0xaf63dc4c8601ec8cull);
  CHECK(harness::fnv1a("foobar") == 0x85944171f73967e8ull);
}

TEST_CASE("slope fit") {
  const std::vector<double> x{0.4, 0.2, 0.1, 0.05, 0.025};
  std::vector<double> y;
  for (double d : x) y.push_back(3.0 * d * d);
  CHECK(*harness::fit_loglog_slope(x, y) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK_FALSE(harness::fit_loglog_slope(std::vector<double>{0.2, 0.1}, std::vector<double>{1.0, 0.5}));
  // only the finest three enter
  y[0] = 100.0;
  CHECK(*harness::fit_loglog_slope(x, y) == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("sweep outputs") {
  harness::ExperimentConfig c;
  c.spec_path = kExamples + "/game_3state.yaml";
  c.solver = "solve-stationary";
  c.deltas = {0.2, 0.1, 0.05};
  c.output_dir = scratch("a").string();
  c.gnuplot = true;
  const auto report = harness::run(c);
  REQUIRE(report.rows.size() == 3);
  CHECK(report.rows[0].delta > report.rows[1].delta);
  REQUIRE(report.slope);
  CHECK(*report.slope > 0.5);
  for (const char* f : {"report.csv", "values.csv", "timing.csv", "manifest.json", "plot.gp"})
    CHECK(fs::exists(fs::path(c.output_dir) / f));
  const std::string csv = slurp(fs::path(c.output_dir) / "report.csv");
  CHECK(csv.rfind("delta,resolution,rho,error,value_norm\r\n", 0) == 0);

  const auto manifest = nlohmann::json::parse(slurp(fs::path(c.output_dir) / "manifest.json"));
  CHECK(manifest["library"]["version"] == harness::kLibraryVersion);
  CHECK(manifest["spec"]["fnv1a"].get<std::string>().size() == 16);
  CHECK(manifest.contains("config_fnv1a"));
  CHECK(manifest["rows"].size() == 3);

  harness::ExperimentConfig again = c;
  again.output_dir = scratch("b").string();
  harness::run(again);
  for (const char* f : {"report.csv", "values.csv", "manifest.json"})
    CHECK(slurp(fs::path(c.output_dir) / f) == slurp(fs::path(again.output_dir) / f));

  const auto diffs = harness::compare((fs::path(c.output_dir) / "values.csv").string(),
                                      (fs::path(again.output_dir) / "values.csv").string());
  CHECK(diffs.size() == 3);
  for (const auto& d : diffs) CHECK(d.sup_difference == 0.0);
}

TEST_CASE("single delta gives no slope") {
  harness::ExperimentConfig c;
  c.spec_path = kExamples + "/game_2state.yaml";
  c.solver = "solve-stationary";
  c.deltas = {0.1};
  c.output_dir = scratch("single").string();
  const auto report = harness::run(c);
  CHECK(report.rows.size() == 1);
  CHECK_FALSE(report.slope);
}

TEST_CASE("compare rejects mismatched files") {
  const fs::path dir = scratch("cmp");
  write(dir / "a.csv", "delta,state,value\r\n0.1,s0,1\r\n");
  write(dir / "b.csv", "delta,z,value\r\n0.1,s0,1\r\n");
  write(dir / "c.csv", "delta,state,value\r\n0.1,s1,1\r\n");
  write(dir / "d.csv", "delta,state,value\r\n0.1,s0,1.5\r\n");
  CHECK_THROWS_AS(harness::compare((dir / "a.csv").string(), (dir / "b.csv").string()), ValidationError);
  CHECK_THROWS_AS(harness::compare((dir / "a.csv").string(), (dir / "c.csv").string()), ValidationError);
  const auto d = harness::compare((dir / "a.csv").string(), (dir / "d.csv").string());
  REQUIRE(d.size() == 1);
  CHECK(d[0].sup_difference == 0.5);
}

TEST_CASE("every solver runs on a small sweep") {
  struct Case {
    const char* solver;
    const char* spec;
    std::vector<double> deltas;
    std::vector<std::size_t> resolutions;
  };
  const std::vector<Case> cases{
      {"solve-observed", "/game_2state.yaml", {0.2, 0.1}, {}},
      {"solve-stationary", "/game_2state.yaml", {0.2, 0.1}, {}},
      {"limit-eq", "/game_2state.yaml", {}, {}},
      {"guarantee", "/game_2state.yaml", {0.2, 0.1}, {}},
      {"solve-belief", "/game_2state.yaml", {0.2}, {8}},
      {"belief-sweep", "/game_2state.yaml", {0.2, 0.1}, {8, 16}},
      {"diffgame-pure", "/linear_1d.yaml", {0.2, 0.1}, {10, 20}},
      {"diffgame-relaxed", "/linear_1d.yaml", {0.2, 0.1}, {10, 20}},
      {"diffgame-random", "/matching_pennies.yaml", {0.2, 0.1}, {4, 8}},
      {"isaacs", "/pursuit_2d.yaml", {}, {}},
      {"hji-residual", "/linear_1d.yaml", {0.1, 0.05}, {20, 40}},
  };
  for (const auto& k : cases) {
    CAPTURE(k.solver);
    harness::ExperimentConfig c;
    c.spec_path = kExamples + k.spec;
    c.solver = k.solver;
    c.deltas = k.deltas;
    c.resolutions = k.resolutions;
    c.samples = 20;
    c.output_dir = scratch(k.solver).string();
    const auto report = harness::run(c);
    CHECK_FALSE(report.rows.empty());
    CHECK(fs::file_size(fs::path(c.output_dir) / "values.csv") > 0);
  }
}

TEST_CASE("cli exit codes") {
  const fs::path dir = scratch("cli");
  CHECK(cli("matgame " + kExamples + "/matrix_rps.yaml") == 0);
  CHECK(cli("--bogus") == 2);
  CHECK(cli("solve-stationary") == 2);
  write(dir / "bad.yaml", "states: [s0]\nactions1: [a]\nactions2: [b]\npayoff: [[[1]]]\nrates: [[[[1]]]]\n"
                          "evaluation: {kind: exponential, rho: 1}\n");
  CHECK(cli("solve-stationary --spec " + (dir / "bad.yaml").string() + " --out " + (dir / "o").string()) == 2);
  write(dir / "cfg.yaml", "solver: solve-stationary\ndeltas: [0.2]\ntolerance: 1e-12\n");
  CHECK(cli("run --spec " + kExamples + "/game_2state.yaml --config " + (dir / "cfg.yaml").string() + " --out " +
            (dir / "ok").string()) == 0);
  write(dir / "slow.yaml", "solver: solve-stationary\ndeltas: [0.01]\nmax_iterations: 5\n");
  CHECK(cli("run --spec " + kExamples + "/game_2state.yaml --config " + (dir / "slow.yaml").string() + " --out " +
            (dir / "slow").string()) == 3);
  CHECK(cli("compare " + (dir / "ok" / "values.csv").string() + " " + (dir / "ok" / "values.csv").string()) == 0);
}
