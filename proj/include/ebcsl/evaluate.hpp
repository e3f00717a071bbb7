#pragma once

#include <fstream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "ebcsl/policy.hpp"

namespace ebcsl {

struct EpisodeRecord {
  double operational_return = 0.0;  // R_0
  bool violated = false;            // any step with c_safe > 0
};

struct EvalReport {
  int episodes = 0;
  double avg_operational_return = 0.0;
  double safety_violation_rate = 0.0;
  std::vector<EpisodeRecord> records;

  void finalize() {
    episodes = static_cast<int>(records.size());
    double sum = 0.0;
    int bad = 0;
    for (const auto& r : records) {
      sum += r.operational_return;
      if (r.violated) ++bad;
    }
    avg_operational_return = episodes > 0 ? sum / episodes : 0.0;
    safety_violation_rate = episodes > 0 ? static_cast<double>(bad) / episodes : 0.0;
  }

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["episodes"] = episodes;
    j["avg_operational_return"] = avg_operational_return;
    j["safety_violation_rate"] = safety_violation_rate;
    nlohmann::json recs = nlohmann::json::array();
    for (const auto& r : records)
      recs.push_back({{"operational_return", r.operational_return},
                      {"violated", r.violated}});
    j["records"] = recs;
    return j;
  }
};

inline EpisodeRecord run_greedy_episode(const PolicyBundle& policy,
                                        const ScenarioConfig& cfg, uint64_t seed,
                                        std::ostream* trace = nullptr) {
  Rng rng(seed);
  GlobalState s = reset(cfg, rng);
  Allocation prev = Allocation::zeros(cfg.fleet_size);
  bool force = true;
  EpisodeRecord rec;
  if (trace) trace_header(*trace);
  for (int t = 0; t < cfg.steps(); ++t) {
    HighDecision hd = act_high(policy, s, cfg, prev, force, rng, /*greedy=*/true);
    std::vector<double> powers(cfg.fleet_size, 0.0);
    for (int m = 0; m < cfg.fleet_size; ++m) {
      if (!hd.alloc.bits[m]) continue;
      LowDecision ld = act_low(policy, s, m, hd.alloc, cfg, rng, /*greedy=*/true);
      powers[m] = ld.power;
    }
    StepOutcome out = step(s, hd.alloc, powers, rng, cfg);
    if (trace) trace_rows(*trace, s, hd.alloc, out);
    rec.operational_return += out.operational_reward;
    if (out.safety_cost > 0.0) rec.violated = true;
    prev = hd.alloc;
    force = out.forced_termination;
    s = std::move(out.next_state);
  }
  return rec;
}

// Greedy-mode evaluation: allocation by distribution mode, power by the
// squashed mean; environment stochasticity (travel, drains, day pick, initial
// SoC) stays live. Episodes use independent seeded streams and the report is
// reduced in episode order regardless of the worker count.
inline EvalReport evaluate_policy(const PolicyBundle& policy, const ScenarioConfig& cfg,
                                  int episodes, uint64_t seed, int workers = 1) {
  EvalReport report;
  report.records.resize(episodes);

  auto run_range = [&](int begin, int end) {
    for (int e = begin; e < end; ++e)
      report.records[e] = run_greedy_episode(policy, cfg, mix_seed(seed, 91000 + e));
  };

  workers = std::max(1, std::min(workers, episodes == 0 ? 1 : episodes));
  if (workers == 1) {
    run_range(0, episodes);
  } else {
    std::vector<std::thread> pool;
    int per = (episodes + workers - 1) / workers;
    for (int w = 0; w < workers; ++w) {
      int begin = w * per;
      int end = std::min(episodes, begin + per);
      if (begin >= end) break;
      pool.emplace_back(run_range, begin, end);
    }
    for (auto& th : pool) th.join();
  }
  report.finalize();
  return report;
}

}  // namespace ebcsl
