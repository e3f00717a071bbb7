#pragma once

#include <string>
#include <thread>
#include <vector>

#include "ebcsl/env.hpp"
#include "ebcsl/policy.hpp"

namespace ebcsl {

// One transition with everything the trainer needs to recompute likelihoods
// and values under fresh parameters.
struct StepRecord {
  ad::Vec genc;                      // encoding of S_t
  std::vector<uint8_t> lay_mask;     // layover set at t => option support
  std::vector<uint8_t> prev_bits;    // omega_{t-1}
  std::vector<uint8_t> alloc_bits;   // omega_t
  bool forced = false;               // beta pinned to 1 (arrival/departure or t=0)
  bool sequential = false;           // allocation came from the PL head
  double beta = 1.0;
  double logp_high = 0.0;
  double r_opr = 0.0;
  double c_safe = 0.0;
  double v_r = 0.0;                  // critic predictions at (S_t, w_t)
  double v_c = 0.0;

  // controlled agents (omega_{m,t} = 1), aligned entries
  std::vector<int> agents;
  std::vector<ad::Vec> lencs;
  std::vector<double> power, z, lo, hi, logp_low;

  int episode = 0;
  int t = 0;
};

struct RolloutBuffer {
  std::vector<StepRecord> rows;  // episodes * T, episode-major
  int episodes = 0;
  int steps_per_episode = 0;

  const StepRecord& row(int episode, int t) const {
    return rows[static_cast<size_t>(episode) * steps_per_episode + t];
  }
};

namespace detail {

inline void collect_episode(const ScenarioConfig& cfg, const PolicyBundle& policy,
                            int episode_index, uint64_t seed, StepRecord* out_rows) {
  Rng rng(seed);
  GlobalState s = reset(cfg, rng);
  Allocation prev = Allocation::zeros(cfg.fleet_size);
  bool force = true;  // beta initialized to 1 at the episode start
  int t_cap = cfg.steps();

  for (int t = 0; t < t_cap; ++t) {
    StepRecord& row = out_rows[t];
    row.episode = episode_index;
    row.t = t;
    row.genc = encode_global(s, cfg);
    row.lay_mask = lay_mask_of(s);
    row.prev_bits = prev.bits;
    row.forced = force;

    HighDecision hd = act_high(policy, s, cfg, prev, force, rng);
    row.alloc_bits = hd.alloc.bits;
    row.beta = hd.beta;
    row.logp_high = hd.log_prob;
    row.sequential = hd.sequential;

    std::vector<double> powers(cfg.fleet_size, 0.0);
    for (int m = 0; m < cfg.fleet_size; ++m) {
      if (!hd.alloc.bits[m]) continue;
      LowDecision ld = act_low(policy, s, m, hd.alloc, cfg, rng);
      powers[m] = ld.power;
      if (ld.lo < ld.hi) {
        row.agents.push_back(m);
        row.lencs.push_back(encode_local(s, m, hd.alloc, cfg));
        row.power.push_back(ld.power);
        row.z.push_back(ld.z);
        row.lo.push_back(ld.lo);
        row.hi.push_back(ld.hi);
        row.logp_low.push_back(ld.log_prob);
      }
    }

    row.v_r = value_r(policy, row.genc, hd.alloc);
    row.v_c = value_c(policy, row.genc, hd.alloc);

    StepOutcome out = step(s, hd.alloc, powers, rng, cfg);
    row.r_opr = out.operational_reward;
    row.c_safe = out.safety_cost;

    prev = hd.alloc;
    force = out.forced_termination;
    s = std::move(out.next_state);
  }
}

}  // namespace detail

// Runs E full episodes under a frozen parameter snapshot. Episodes use
// independent streams derived from (seed, episode), and rows land in
// episode-major order, so the result does not depend on the worker count.
inline RolloutBuffer collect_rollouts(const ScenarioConfig& cfg,
                                      const PolicyBundle& policy, int episodes,
                                      uint64_t seed, int workers = 1) {
  RolloutBuffer buf;
  buf.episodes = episodes;
  buf.steps_per_episode = cfg.steps();
  buf.rows.resize(static_cast<size_t>(episodes) * cfg.steps());

  auto run_range = [&](int begin, int end) {
    for (int e = begin; e < end; ++e) {
      detail::collect_episode(cfg, policy, e, mix_seed(seed, 1000 + e),
                              buf.rows.data() + static_cast<size_t>(e) * cfg.steps());
    }
  };

  workers = std::max(1, std::min(workers, episodes));
  if (workers == 1) {
    run_range(0, episodes);
    return buf;
  }
  std::vector<std::thread> pool;
  int per = (episodes + workers - 1) / workers;
  for (int w = 0; w < workers; ++w) {
    int begin = w * per;
    int end = std::min(episodes, begin + per);
    if (begin >= end) break;
    pool.emplace_back(run_range, begin, end);
  }
  for (auto& th : pool) th.join();
  return buf;
}

}  // namespace ebcsl
