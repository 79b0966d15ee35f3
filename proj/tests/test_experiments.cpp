#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "stable_exit/experiments.hpp"

using namespace stable_exit;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

json harmonic_json() {
  return json::parse(R"({
    "kind": "harmonic_decay",
    "region": {"beta": 0.5, "a": 1, "d": 2},
    "process": {"alpha": 1.0},
    "start": [1, 0],
    "scales": [8, 16, 32, 64],
    "n": 4000,
    "seed": 17
  })");
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::path(TEST_TMP_DIR) / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

int run_cli(const std::string& args, const fs::path& log) {
  const std::string cmd = std::string(STABLE_EXIT_CLI) + " " + args + " > " + log.string() + " 2>&1";
  const int rc = std::system(cmd.c_str());
  return WEXITSTATUS(rc);
}

void write_json(const fs::path& p, const json& j) { std::ofstream(p) << j.dump(); }

json without_runtime(json j) {
  j.erase("runtime");
  return j;
}

}  // namespace

TEST_CASE("predictions") {
  const auto p = predict(2, 1.0, 0.5);
  CHECK(p.p0 == 3.0);
  CHECK(p.alpha_beta_p0 == 1.5);
  CHECK(p.alpha_beta_p0_minus_1 == 1.0);
}

TEST_CASE("config parsing and validation") {
  const auto c = parse_config(harmonic_json());
  CHECK(c.kind == ExperimentKind::HarmonicDecay);
  CHECK(c.scales.size() == 4);
  CHECK(c.seed == 17);

  auto expect_error = [](json j, const std::string& needle) {
    try {
      parse_config(j);
      FAIL("accepted an invalid config");
    } catch (const ConfigError& e) {
      CHECK_MESSAGE(std::string(e.what()).find(needle) != std::string::npos, e.what());
    }
  };
  auto j = harmonic_json();
  j["process"]["alpha"] = 2.0;
  expect_error(j, "0 < alpha < 2");
  j = harmonic_json();
  j["region"]["beta"] = 1.0;
  expect_error(j, "0 < beta < 1");
  j = harmonic_json();
  j["region"]["d"] = 1;
  j["start"] = {1};
  expect_error(j, "d >= 2");
  j = harmonic_json();
  j["scales"] = {8, 32, 16};
  expect_error(j, "ascending");
  j = harmonic_json();
  j["kind"] = "nonsense";
  expect_error(j, "kind");
  j = harmonic_json();
  j["start"] = {5, 0};
  expect_error(j, "start");
  j = harmonic_json();
  j["n"] = "many";
  expect_error(j, "'n'");
  j = harmonic_json();
  j.erase("region");
  expect_error(j, "region");
}

TEST_CASE("shipped configs are valid") {
  int seen = 0;
  for (const auto& entry : fs::directory_iterator(CONFIG_DIR)) {
    CAPTURE(entry.path().string());
    CHECK_NOTHROW(load_config(entry.path()));
    ++seen;
  }
  CHECK(seen >= 5);
}

TEST_CASE("config echo round-trips") {
  const auto c = parse_config(harmonic_json());
  const auto again = parse_config(config_to_json(c));
  CHECK(config_to_json(again) == config_to_json(c));
  CHECK_FALSE(config_to_json(c).contains("workers"));
}

TEST_CASE("harmonic decay run") {
  auto c = parse_config(harmonic_json());
  c.workers = 1;
  const RunRecord a = run_experiment(c);
  CHECK(a.result.at("predicted").at("escape_slope_fixed_start") == -1.5);
  CHECK(a.result.at("version") == kVersion);
  CHECK(a.result.at("details").at("streams").size() == 4);
  REQUIRE(a.fit);
  CHECK(a.fit->predicted == -1.5);
  CHECK(a.rows.size() == 4);

  c.workers = 4;
  const RunRecord b = run_experiment(c);
  CHECK(a.result.dump() == b.result.dump());
  CHECK(without_runtime(a.to_json()).dump() == without_runtime(b.to_json()).dump());

  const RunRecord back = run_record_from_json(json::parse(a.to_json().dump()));
  CHECK(back.to_json() == a.to_json());
  CHECK(back.rows.size() == a.rows.size());
  CHECK(back.rows[2].estimate == a.rows[2].estimate);
  CHECK(back.fit->slope == a.fit->slope);
}

TEST_CASE("every experiment kind runs") {
  auto base = json::parse(R"({"region": {"beta": 0.5, "d": 2}, "process": {"alpha": 1.0},
                              "seed": 3, "n": 3000})");
  auto j = base;
  j["kind"] = "bound_check";
  j["start"] = {1, 0};
  j["scales"] = {8, 16};
  auto r = run_experiment(parse_config(j));
  CHECK(r.result.at("details").at("points").size() == 2);
  CHECK(r.result.at("details").contains("eq5_constant"));

  j = base;
  j["kind"] = "survival";
  j["domain"] = "cylinder";
  j["start"] = {-10, 0};
  j["scales"] = {4, 16};
  j["h"] = 0.02;
  j["t_max"] = 20;
  j["time_grid"] = {1, 2, 3, 4, 5, 6};
  j["decay_window"] = {2, 5};
  r = run_experiment(parse_config(j));
  CHECK(r.result.at("details").at("curves").size() == 2);
  CHECK(r.result.at("details").at("curves").at(0).contains("decay"));

  j = base;
  j["kind"] = "scaling_check";
  j["scales"] = {1, 2, 4};
  j["h"] = 0.01;
  j["t_max"] = 100;
  r = run_experiment(parse_config(j));
  REQUIRE(r.fit);
  CHECK(r.fit->slope == doctest::Approx(1.0).epsilon(0.1));

  j = base;
  j["kind"] = "tail_index";
  j["start"] = {2, 0};
  j["n"] = 20000;
  j["t_max"] = 1000;
  j["halving_n"] = 2000;
  j["min_exceedances"] = 50;
  j["tail_quantile"] = 0.9;
  j["moments"] = {0.0, 1.5};
  r = run_experiment(parse_config(j));
  const auto& d = r.result.at("details");
  CHECK(d.at("moments").at(0).at("estimate") == 1.0);
  CHECK(d.contains("step_halving"));
  CHECK(r.result.at("predicted").at("survival_slope") == -3.0);
}

TEST_CASE("output files") {
  auto c = parse_config(harmonic_json());
  const RunRecord rec = run_experiment(c);
  const fs::path dir = scratch("outputs");
  emit_outputs(rec, dir);
  const std::string csv = slurp(dir / "curves.csv");
  CHECK(csv.rfind("scale,estimate,ci_lo,ci_hi,n\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 5);
  const json j = json::parse(slurp(dir / "results.json"));
  CHECK(run_record_from_json(j).to_json() == rec.to_json());
  const std::string svg = slurp(dir / "plot.svg");
  CHECK(svg.find("<svg") != std::string::npos);
  CHECK(svg.find("fit slope") != std::string::npos);
  CHECK(svg.find("predicted slope -1.5") != std::string::npos);
  CHECK(std::count(svg.begin(), svg.end(), '\n') > 5);

  std::ofstream(dir / "blocker") << "x";
  CHECK_THROWS(emit_outputs(rec, dir / "blocker" / "sub"));
}

TEST_CASE("command line interface") {
  const fs::path dir = scratch("cli");
  const fs::path log = dir / "log.txt";

  CHECK(run_cli("predict --d 2 --alpha 1 --beta 0.5", log) == 0);
  const std::string out = slurp(log);
  CHECK(out.find("p0 3\n") != std::string::npos);
  CHECK(out.find("alpha_beta_p0 1.5\n") != std::string::npos);
  CHECK(out.find("alpha_beta_p0_minus_1 1\n") != std::string::npos);
  CHECK(run_cli("predict --d 2 --alpha 2.5 --beta 0.5", log) == 2);

  write_json(dir / "good.json", harmonic_json());
  CHECK(run_cli("validate --config " + (dir / "good.json").string(), log) == 0);
  auto bad = harmonic_json();
  bad["region"]["beta"] = 1.5;
  write_json(dir / "bad.json", bad);
  CHECK(run_cli("validate --config " + (dir / "bad.json").string(), log) == 2);
  CHECK(slurp(log).find("beta") != std::string::npos);
  CHECK(run_cli("validate --config " + (dir / "missing.json").string(), log) == 2);
  CHECK(run_cli("frobnicate", log) == 2);

  const fs::path out1 = dir / "run1", out2 = dir / "run2";
  CHECK(run_cli("run --config " + (dir / "good.json").string() + " --out " + out1.string() +
                    " --workers 1",
                log) == 0);
  CHECK(run_cli("run --config " + (dir / "good.json").string() + " --out " + out2.string() +
                    " --workers 3",
                log) == 0);
  const json r1 = json::parse(slurp(out1 / "results.json"));
  const json r2 = json::parse(slurp(out2 / "results.json"));
  CHECK(r1.at("runtime").at("workers") == 1);
  CHECK(r2.at("runtime").at("workers") == 3);
  CHECK(without_runtime(r1) == without_runtime(r2));

  CHECK(run_cli("run --config " + (dir / "good.json").string() + " --out " + out1.string() +
                    " --seed 99",
                log) == 0);
  CHECK(json::parse(slurp(out1 / "results.json")).at("seed") == 99);

  setenv("STABLE_EXIT_WORKERS", "2", 1);
  CHECK(run_cli("run --config " + (dir / "good.json").string() + " --out " + out1.string(), log) == 0);
  CHECK(json::parse(slurp(out1 / "results.json")).at("runtime").at("workers") == 2);
  unsetenv("STABLE_EXIT_WORKERS");

  // a run that cannot produce a tail window aborts without writing a record
  auto tiny = json::parse(R"({"kind": "tail_index", "region": {"beta": 0.5, "d": 2},
                              "process": {"alpha": 1.0}, "start": [2, 0], "n": 100,
                              "t_max": 100})");
  write_json(dir / "tiny.json", tiny);
  CHECK(run_cli("run --config " + (dir / "tiny.json").string() + " --out " + (dir / "tiny").string(),
                log) == 3);
  CHECK_FALSE(fs::exists(dir / "tiny" / "results.json"));
}
