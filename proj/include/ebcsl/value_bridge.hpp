#pragma once

#include <cmath>
#include <vector>

#include "ebcsl/policy.hpp"

namespace ebcsl {

struct MonteCarloEstimate {
  double mean = 0.0;
  double standard_error = 0.0;
};

struct ValueBridgeResult {
  // reward identity: V_H^R(s) vs sum_w pi_H(w|s) V_L^R(s, w)
  MonteCarloEstimate lhs_reward, rhs_reward;
  // cost identity: V_H^C(s) vs V_L^C(s)
  MonteCarloEstimate lhs_cost, rhs_cost;
};

namespace detail {

struct ReturnPair {
  double reward = 0.0;
  double cost = 0.0;
};

// Rolls the composed policy forward from (state, first option) to the end of
// the day, accumulating operational reward and safety cost.
inline ReturnPair rollout_from(const PolicyBundle& policy, const ScenarioConfig& cfg,
                               GlobalState s, const Allocation& first, Rng& rng,
                               bool greedy) {
  ReturnPair acc;
  Allocation alloc = first;
  bool have_first = true;
  Allocation prev = Allocation::zeros(cfg.fleet_size);
  for (size_t m = 0; m < s.locals.size(); ++m)
    prev.bits[m] = static_cast<uint8_t>(s.locals[m].prev_alloc);
  bool force = true;

  for (int t = s.clock; t < cfg.steps(); ++t) {
    if (!have_first) {
      HighDecision hd = act_high(policy, s, cfg, prev, force, rng, greedy);
      alloc = hd.alloc;
    }
    have_first = false;
    std::vector<double> powers(cfg.fleet_size, 0.0);
    for (int m = 0; m < cfg.fleet_size; ++m) {
      if (!alloc.bits[m]) continue;
      powers[m] = act_low(policy, s, m, alloc, cfg, rng, greedy).power;
    }
    StepOutcome out = step(s, alloc, powers, rng, cfg);
    acc.reward += out.operational_reward;
    acc.cost += out.safety_cost;
    prev = alloc;
    force = out.forced_termination;
    s = std::move(out.next_state);
  }
  return acc;
}

inline MonteCarloEstimate summarize(const std::vector<double>& xs) {
  MonteCarloEstimate e;
  if (xs.empty()) return e;
  double n = static_cast<double>(xs.size());
  for (double x : xs) e.mean += x;
  e.mean /= n;
  double var = 0.0;
  for (double x : xs) var += (x - e.mean) * (x - e.mean);
  var /= std::max(1.0, n - 1.0);
  e.standard_error = std::sqrt(var / n);
  return e;
}

}  // namespace detail

// Monte-Carlo check of the value bridge between the two levels: the
// high-level value at `state` against the pi_H-weighted low-level values over
// the current option space (reward), and the option-free cost values. The
// pair of estimates per identity are produced from independent streams.
inline ValueBridgeResult high_value_from_low(const PolicyBundle& policy,
                                             const ScenarioConfig& cfg,
                                             const GlobalState& state, int num_rollouts,
                                             Rng& rng, bool greedy = false) {
  if (num_rollouts < 100)
    throw ContractViolation("high_value_from_low: need at least 100 rollouts");

  Allocation prev = Allocation::zeros(cfg.fleet_size);
  for (size_t m = 0; m < state.locals.size(); ++m)
    prev.bits[m] = static_cast<uint8_t>(state.locals[m].prev_alloc);
  bool force = state.clock == 0 ? true : forced_termination(state);

  ValueBridgeResult res;

  // lhs: follow pi_H from the state itself
  std::vector<double> lhs_r(num_rollouts), lhs_c(num_rollouts);
  for (int i = 0; i < num_rollouts; ++i) {
    Rng stream(mix_seed(rng.next_u64(), 7001 + i));
    HighDecision hd = act_high(policy, state, cfg, prev, force, stream, greedy);
    auto rp = detail::rollout_from(policy, cfg, state, hd.alloc, stream, greedy);
    lhs_r[i] = rp.reward;
    lhs_c[i] = rp.cost;
  }
  res.lhs_reward = detail::summarize(lhs_r);
  res.lhs_cost = detail::summarize(lhs_c);

  // rhs reward: force each option w first, weight by pi_H(w | state)
  auto support = option_space(state, cfg);
  ad::Vec genc = encode_global(state, cfg);
  double beta = 1.0;
  if (!force) {
    double logit = policy.beta_net.forward(genc)[0];
    beta = 1.0 / (1.0 + std::exp(-logit));
  }
  auto mu = softmax(enum_option_logits(policy.mu_scorer, genc, support));
  auto dist = compose_high_policy(support, mu, beta, prev);

  int per_option = std::max(100, num_rollouts / static_cast<int>(support.size()));
  double rhs_mean = 0.0;
  double rhs_var = 0.0;
  for (size_t oi = 0; oi < support.size(); ++oi) {
    if (dist.probs[oi] <= 0.0) continue;
    std::vector<double> vals(per_option);
    for (int i = 0; i < per_option; ++i) {
      Rng stream(mix_seed(rng.next_u64(), 9001 + i));
      auto rp = detail::rollout_from(policy, cfg, state, support[oi], stream, greedy);
      vals[i] = rp.reward;
    }
    auto est = detail::summarize(vals);
    rhs_mean += dist.probs[oi] * est.mean;
    rhs_var += dist.probs[oi] * dist.probs[oi] * est.standard_error * est.standard_error;
  }
  res.rhs_reward.mean = rhs_mean;
  res.rhs_reward.standard_error = std::sqrt(rhs_var);

  // rhs cost: independent re-estimate of the same option-free quantity
  std::vector<double> rhs_c(num_rollouts);
  for (int i = 0; i < num_rollouts; ++i) {
    Rng stream(mix_seed(rng.next_u64(), 11001 + i));
    HighDecision hd = act_high(policy, state, cfg, prev, force, stream, greedy);
    auto rp = detail::rollout_from(policy, cfg, state, hd.alloc, stream, greedy);
    rhs_c[i] = rp.cost;
  }
  res.rhs_cost = detail::summarize(rhs_c);
  return res;
}

}  // namespace ebcsl
