#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "ebcsl/harness.hpp"

int main(int argc, char** argv) {
  CLI::App app{"ebcsl - electric bus charging scheduling lab"};
  app.require_subcommand(1);

  // validate-config <path>
  std::string validate_path;
  auto* validate = app.add_subcommand("validate-config", "check a scenario config file");
  validate->add_option("path", validate_path, "config file")->required();

  // run --mode {train|eval|oracle|baseline} --config <path> ...
  std::string mode, config_path;
  ebcsl::RunFlags flags;
  uint64_t seed = 0;
  int episodes = 0, ckpt_every = 0, iterations = 0;
  auto* run = app.add_subcommand("run", "run an experiment mode");
  run->add_option("--mode", mode, "train|eval|oracle|baseline")->required();
  run->add_option("--config", config_path, "scenario config file")->required();
  auto* seed_opt = run->add_option("--seed", seed, "override the config seed");
  auto* eps_opt = run->add_option("--episodes", episodes, "evaluation episodes");
  run->add_option("--out", flags.out_dir, "run directory");
  auto* ck_opt = run->add_option("--ckpt-every", ckpt_every, "checkpoint period");
  run->add_option("--ckpt", flags.ckpt_path, "checkpoint to evaluate");
  auto* it_opt = run->add_option("--iters", iterations, "override training iterations");
  run->add_option("--history-days", flags.forecast_history_days,
                  "days used to build the forecast");

  CLI11_PARSE(app, argc, argv);

  if (validate->parsed()) {
    try {
      ebcsl::ScenarioConfig cfg = ebcsl::load_scenario(validate_path);
      std::cout << "ok: " << validate_path << " (M=" << cfg.fleet_size
                << ", N=" << cfg.charger_count << ", T=" << cfg.steps()
                << ", days=" << cfg.price.days() << ")\n";
      return 0;
    } catch (const std::exception& e) {
      std::cerr << "invalid config: " << e.what() << '\n';
      return 2;
    }
  }

  if (seed_opt->count()) flags.seed = seed;
  if (eps_opt->count()) flags.episodes = episodes;
  if (ck_opt->count()) flags.ckpt_every = ckpt_every;
  if (it_opt->count()) flags.iterations = iterations;
  return ebcsl::run_experiment(config_path, mode, flags);
}
