#pragma once

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "ebcsl/forecast.hpp"
#include "ebcsl/trainer.hpp"
#include "ebcsl/value_bridge.hpp"

namespace ebcsl {

struct RunFlags {
  std::optional<uint64_t> seed;
  std::optional<int> episodes;
  std::string out_dir;
  std::optional<int> ckpt_every;
  std::string ckpt_path;     // eval: policy to load
  std::optional<int> iterations;
  int trace_dumps = 3;
  int forecast_history_days = 7;
};

namespace detail {

inline std::filesystem::path prepare_run_dir(const std::string& base,
                                             const std::string& mode, uint64_t seed) {
  std::filesystem::path dir =
      base.empty() ? std::filesystem::path("runs") / (mode + "_seed" + std::to_string(seed))
                   : std::filesystem::path(base);
  std::filesystem::create_directories(dir);
  return dir;
}

inline void record_run(const std::filesystem::path& dir, const ScenarioConfig& cfg,
                       const std::string& mode, uint64_t seed) {
  nlohmann::json j = scenario_to_json(cfg);
  j["run"] = {{"mode", mode}, {"seed", seed}};
  std::ofstream os(dir / "resolved_config.json");
  os << j.dump(2) << '\n';
}

inline void dump_traces(const std::filesystem::path& dir, const PolicyBundle& policy,
                        const ScenarioConfig& cfg, uint64_t seed, int count) {
  for (int e = 0; e < count; ++e) {
    char name[32];
    std::snprintf(name, sizeof(name), "trace_%03d.csv", e);
    std::ofstream os(dir / name);
    run_greedy_episode(policy, cfg, mix_seed(seed, 91000 + e), &os);
  }
}

inline OracleConfig oracle_config_from_json(const nlohmann::json& j) {
  OracleConfig o;
  if (j.contains("oracle")) {
    const auto& oj = j.at("oracle");
    o.power_levels = oj.value("power_levels", o.power_levels);
    o.energy_bins = oj.value("energy_bins", o.energy_bins);
    o.horizon = oj.value("horizon", o.horizon);
    o.max_table = oj.value("max_table", o.max_table);
  }
  return o;
}

}  // namespace detail

// Orchestrates the CLI modes. Writes metrics, reports, trace dumps and
// checkpoints into the run directory together with the resolved config.
inline int run_experiment(const std::string& config_path, const std::string& mode,
                          const RunFlags& flags, std::ostream& log = std::cout) {
  std::ifstream in(config_path);
  if (!in) {
    log << "error: config file not found: " << config_path << '\n';
    return 2;
  }
  nlohmann::json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    log << "error: config parse failed: " << e.what() << '\n';
    return 2;
  }

  ScenarioConfig cfg;
  TrainConfig tc;
  try {
    cfg = scenario_from_json(j, detail::dirname_of(config_path));
    tc = j.contains("train") ? train_config_from_json(j.at("train")) : TrainConfig{};
  } catch (const std::exception& e) {
    log << "error: invalid config: " << e.what() << '\n';
    return 2;
  }
  if (flags.seed) {
    cfg.seed = *flags.seed;
    tc.seed = *flags.seed;
  } else {
    tc.seed = cfg.seed;
  }
  if (flags.iterations) tc.iterations = *flags.iterations;
  if (flags.ckpt_every) tc.ckpt_every = *flags.ckpt_every;

  auto dir = detail::prepare_run_dir(flags.out_dir, mode, cfg.seed);
  detail::record_run(dir, cfg, mode, cfg.seed);

  try {
    if (mode == "train") {
      Trainer trainer(cfg, tc);
      trainer.set_crash_dump_path((dir / "crash_checkpoint.bin").string());
      std::ofstream metrics(dir / "metrics.csv");
      metrics_header(metrics);
      for (int it = 0; it < tc.iterations; ++it) {
        IterationMetrics m = trainer.train_iteration();
        metrics_row(metrics, m);
        if (tc.ckpt_every > 0 && (it + 1) % tc.ckpt_every == 0) {
          char name[40];
          std::snprintf(name, sizeof(name), "checkpoint_%06d.bin", it + 1);
          save_bundle((dir / name).string(), trainer.policy(),
                      trainer.lagrange().lambda_high, trainer.lagrange().lambda_low);
        }
      }
      save_bundle((dir / "checkpoint_final.bin").string(), trainer.policy(),
                  trainer.lagrange().lambda_high, trainer.lagrange().lambda_low);
      int eval_eps = flags.episodes.value_or(100);
      EvalReport rep = evaluate_policy(trainer.policy(), cfg, eval_eps,
                                       mix_seed(cfg.seed, 0xE7A1), tc.workers);
      std::ofstream ro(dir / "eval_report.json");
      ro << rep.to_json().dump(2) << '\n';
      detail::dump_traces(dir, trainer.policy(), cfg, mix_seed(cfg.seed, 0xE7A1),
                          flags.trace_dumps);
      log << "train: " << tc.iterations << " iterations, eval return "
          << rep.avg_operational_return << ", violation rate "
          << rep.safety_violation_rate << ", artifacts in " << dir << '\n';
    } else if (mode == "eval") {
      if (flags.ckpt_path.empty()) {
        log << "error: --ckpt is required in eval mode\n";
        return 2;
      }
      PolicyBundle policy = load_bundle(flags.ckpt_path);
      int eval_eps = flags.episodes.value_or(500);
      EvalReport rep =
          evaluate_policy(policy, cfg, eval_eps, mix_seed(cfg.seed, 0xE7A1), tc.workers);
      std::ofstream ro(dir / "eval_report.json");
      ro << rep.to_json().dump(2) << '\n';
      detail::dump_traces(dir, policy, cfg, mix_seed(cfg.seed, 0xE7A1), flags.trace_dumps);
      log << "eval: " << rep.episodes << " episodes, return "
          << rep.avg_operational_return << ", violation rate "
          << rep.safety_violation_rate << ", artifacts in " << dir << '\n';
    } else if (mode == "oracle") {
      OracleConfig ocfg = detail::oracle_config_from_json(j);
      ScenarioConfig det = deterministic_analog(cfg);
      OracleResult res = dp_oracle(det, ocfg);
      nlohmann::json out;
      out["feasible"] = res.feasible;
      out["optimal_return"] = res.optimal_return;
      out["slack_per_step"] = res.slack_per_step;
      out["message"] = res.message;
      std::ofstream ro(dir / "oracle_report.json");
      ro << out.dump(2) << '\n';
      if (!res.feasible) {
        log << "oracle: infeasible (" << res.message << ")\n";
        return 1;
      }
      log << "oracle: optimal return " << res.optimal_return << ", artifacts in "
          << dir << '\n';
    } else if (mode == "baseline") {
      OracleConfig ocfg = detail::oracle_config_from_json(j);
      ForecastModel fm = build_forecast(cfg, flags.forecast_history_days);
      int eval_eps = flags.episodes.value_or(500);
      auto res = forecast_baseline(cfg, fm, ocfg, eval_eps, mix_seed(cfg.seed, 0xBA5E));
      if (!res.plan.feasible) {
        log << "baseline: planning infeasible (" << res.plan.message << ")\n";
        return 1;
      }
      nlohmann::json out = res.report.to_json();
      out["planned_return"] = res.plan.optimal_return;
      std::ofstream ro(dir / "eval_report.json");
      ro << out.dump(2) << '\n';
      log << "baseline: planned " << res.plan.optimal_return << ", realized "
          << res.report.avg_operational_return << ", violation rate "
          << res.report.safety_violation_rate << ", artifacts in " << dir << '\n';
    } else {
      log << "error: unknown mode " << mode << '\n';
      return 2;
    }
  } catch (const std::exception& e) {
    log << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

}  // namespace ebcsl
