#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "ebcsl/harness.hpp"
#include "scenarios.hpp"

using namespace ebcsl;
using ebcsl::testing::micro_scenario;

namespace {

std::string write_micro_config(const std::string& name, bool stochastic, int days,
                               nlohmann::json train = {}) {
  ScenarioConfig cfg = micro_scenario(21, stochastic, days);
  nlohmann::json j = scenario_to_json(cfg);
  j["oracle"] = {{"power_levels", {-120.0, -60.0, 0.0, 60.0, 120.0}},
                 {"energy_bins", 61}};
  if (!train.empty()) j["train"] = train;
  std::string path = "/tmp/ebcsl_cfg_" + name + ".json";
  std::ofstream os(path);
  os << j.dump(2);
  return path;
}

}  // namespace

TEST_CASE("config round-trips through json and validates") {
  std::string path = write_micro_config("roundtrip", false, 1);
  ScenarioConfig cfg = load_scenario(path);
  REQUIRE(cfg.fleet_size == 2);
  REQUIRE(cfg.charger_count == 1);
  REQUIRE(cfg.steps() == 24);
  REQUIRE(cfg.price.days() == 1);
}

TEST_CASE("invalid configs produce schema diagnostics") {
  SECTION("missing schema_version") {
    std::string path = "/tmp/ebcsl_noversion.json";
    std::ofstream(path) << "{\"fleet_size\": 2}";
    REQUIRE_THROWS_AS(load_scenario(path), ConfigError);
  }
  SECTION("charger count must stay below the fleet size") {
    ScenarioConfig cfg = micro_scenario(1);
    nlohmann::json j = scenario_to_json(cfg);
    j["charger_count"] = 2;
    std::string path = "/tmp/ebcsl_badn.json";
    std::ofstream(path) << j.dump();
    REQUIRE_THROWS_AS(load_scenario(path), ConfigError);
  }
  SECTION("run_experiment surfaces config problems as exit code 2") {
    std::ostringstream log;
    REQUIRE(run_experiment("/tmp/ebcsl_missing_file.json", "oracle", {}, log) == 2);
    REQUIRE(log.str().find("error") != std::string::npos);
  }
}

TEST_CASE("oracle mode writes its report") {
  std::string path = write_micro_config("oracle", false, 1);
  RunFlags flags;
  flags.out_dir = "/tmp/ebcsl_run_oracle";
  std::filesystem::remove_all(flags.out_dir);
  std::ostringstream log;
  int rc = run_experiment(path, "oracle", flags, log);
  INFO(log.str());
  REQUIRE(rc == 0);
  REQUIRE(std::filesystem::exists("/tmp/ebcsl_run_oracle/oracle_report.json"));
  REQUIRE(std::filesystem::exists("/tmp/ebcsl_run_oracle/resolved_config.json"));
  std::ifstream is("/tmp/ebcsl_run_oracle/oracle_report.json");
  nlohmann::json rep;
  is >> rep;
  REQUIRE(rep["feasible"] == true);
}

TEST_CASE("train mode writes metrics, checkpoints and eval artifacts") {
  nlohmann::json train = {{"iterations", 2},     {"episodes_per_iter", 2},
                          {"epochs_per_iter", 1}, {"batch_size", 32},
                          {"workers", 1},
                          {"sizes", {{"high_actor", {8, 8}},
                                     {"termination", {8}},
                                     {"low_actor", {8}},
                                     {"critic", {8, 8}}}}};
  std::string path = write_micro_config("train", false, 1, train);
  RunFlags flags;
  flags.out_dir = "/tmp/ebcsl_run_train";
  flags.episodes = 4;
  flags.ckpt_every = 1;
  flags.trace_dumps = 2;
  std::filesystem::remove_all(flags.out_dir);
  std::ostringstream log;
  int rc = run_experiment(path, "train", flags, log);
  INFO(log.str());
  REQUIRE(rc == 0);
  REQUIRE(std::filesystem::exists("/tmp/ebcsl_run_train/metrics.csv"));
  REQUIRE(std::filesystem::exists("/tmp/ebcsl_run_train/checkpoint_000001.bin"));
  REQUIRE(std::filesystem::exists("/tmp/ebcsl_run_train/checkpoint_000002.bin"));
  REQUIRE(std::filesystem::exists("/tmp/ebcsl_run_train/checkpoint_final.bin"));
  REQUIRE(std::filesystem::exists("/tmp/ebcsl_run_train/eval_report.json"));
  REQUIRE(std::filesystem::exists("/tmp/ebcsl_run_train/trace_000.csv"));
  REQUIRE(std::filesystem::exists("/tmp/ebcsl_run_train/trace_001.csv"));

  // metrics csv has a header and one row per iteration
  std::ifstream ms("/tmp/ebcsl_run_train/metrics.csv");
  std::string line;
  int lines = 0;
  while (std::getline(ms, line)) ++lines;
  REQUIRE(lines == 3);

  SECTION("eval mode consumes the final checkpoint") {
    RunFlags eflags;
    eflags.out_dir = "/tmp/ebcsl_run_eval";
    eflags.episodes = 5;
    eflags.ckpt_path = "/tmp/ebcsl_run_train/checkpoint_final.bin";
    std::filesystem::remove_all(eflags.out_dir);
    std::ostringstream elog;
    REQUIRE(run_experiment(path, "eval", eflags, elog) == 0);
    std::ifstream is("/tmp/ebcsl_run_eval/eval_report.json");
    nlohmann::json rep;
    is >> rep;
    REQUIRE(rep["episodes"] == 5);
  }
  SECTION("eval without a checkpoint fails cleanly") {
    std::ostringstream elog;
    RunFlags eflags;
    eflags.out_dir = "/tmp/ebcsl_run_eval2";
    REQUIRE(run_experiment(path, "eval", eflags, elog) == 2);
  }
}

TEST_CASE("baseline mode plans and reports") {
  std::string path = write_micro_config("baseline", true, 8);
  RunFlags flags;
  flags.out_dir = "/tmp/ebcsl_run_baseline";
  flags.episodes = 6;
  flags.forecast_history_days = 7;
  std::filesystem::remove_all(flags.out_dir);
  std::ostringstream log;
  int rc = run_experiment(path, "baseline", flags, log);
  INFO(log.str());
  REQUIRE(rc == 0);
  std::ifstream is("/tmp/ebcsl_run_baseline/eval_report.json");
  nlohmann::json rep;
  is >> rep;
  REQUIRE(rep["episodes"] == 6);
  REQUIRE(rep.contains("planned_return"));
}

TEST_CASE("distinct seeds produce distinct run artifacts") {
  nlohmann::json train = {{"iterations", 1},     {"episodes_per_iter", 2},
                          {"epochs_per_iter", 1}, {"batch_size", 32},
                          {"sizes", {{"high_actor", {8}},
                                     {"termination", {8}},
                                     {"low_actor", {8}},
                                     {"critic", {8}}}}};
  std::string path = write_micro_config("seeds", false, 1, train);
  std::vector<std::string> rows;
  for (uint64_t seed : {101ULL, 202ULL}) {
    RunFlags flags;
    flags.seed = seed;
    flags.episodes = 2;
    flags.trace_dumps = 0;
    flags.out_dir = "/tmp/ebcsl_run_seed" + std::to_string(seed);
    std::filesystem::remove_all(flags.out_dir);
    std::ostringstream log;
    REQUIRE(run_experiment(path, "train", flags, log) == 0);
    std::ifstream ms(flags.out_dir + "/metrics.csv");
    std::string header, row;
    std::getline(ms, header);
    std::getline(ms, row);
    rows.push_back(row);
  }
  REQUIRE(rows[0] != rows[1]);
}
