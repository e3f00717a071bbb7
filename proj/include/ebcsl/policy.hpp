#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "ebcsl/env.hpp"
#include "ebcsl/heads.hpp"
#include "ebcsl/nets.hpp"
#include "ebcsl/options.hpp"

namespace ebcsl {

struct PolicySizes {
  std::vector<int> high_actor = {128, 128};
  std::vector<int> termination = {64, 64};
  std::vector<int> low_actor = {64, 64};
  std::vector<int> critic = {128, 128};
  int enum_cap = kEnumerationCap;
};

// All networks of the hierarchical agent. The high level combines the option
// scorer mu(w|S) with the termination net beta(S); the low level is a shared
// squashed-gaussian power actor; both critics score (S, w) and serve the two
// levels through the value-bridge identity.
struct PolicyBundle {
  PolicySizes sizes;
  Mlp mu_scorer;      // (genc, candidate bits) -> logit
  Mlp seq_net;        // (genc, picked mask) -> M+1 logits, for big layover sets
  Mlp beta_net;       // genc -> pre-sigmoid termination logit
  Mlp low_actor;      // lenc -> squash-space mean
  ad::ParamVec low_log_std;
  Mlp critic_r;       // (genc, alloc bits) -> V_R
  Mlp critic_c;       // (genc, alloc bits) -> V_C

  static PolicyBundle make(const ScenarioConfig& cfg, const PolicySizes& sizes,
                           uint64_t seed) {
    int g = global_encoding_dim(cfg);
    int l = local_encoding_dim(cfg);
    int m = cfg.fleet_size;
    Rng rng(mix_seed(seed, 0xBEEF));
    PolicyBundle b;
    b.sizes = sizes;
    b.mu_scorer = Mlp::make(with_io(g + m, sizes.high_actor, 1), rng);
    b.seq_net = Mlp::make(with_io(g + m, sizes.high_actor, m + 1), rng);
    b.beta_net = Mlp::make(with_io(g, sizes.termination, 1), rng);
    b.low_actor = Mlp::make(with_io(l, sizes.low_actor, 1), rng);
    b.low_log_std = ad::ParamVec(1);
    b.low_log_std.v[0] = std::log(0.25);
    b.critic_r = Mlp::make(with_io(g + m, sizes.critic, 1), rng, 1.0);
    b.critic_c = Mlp::make(with_io(g + m, sizes.critic, 1), rng, 1.0);
    return b;
  }

  static std::vector<int> with_io(int in, std::vector<int> hidden, int out) {
    std::vector<int> sizes;
    sizes.push_back(in);
    for (int h : hidden) sizes.push_back(h);
    sizes.push_back(out);
    return sizes;
  }

  void zero_grad() {
    mu_scorer.zero_grad();
    seq_net.zero_grad();
    beta_net.zero_grad();
    low_actor.zero_grad();
    low_log_std.zero_grad();
    critic_r.zero_grad();
    critic_c.zero_grad();
  }
};

inline ad::Vec critic_input(const ad::Vec& genc, const Allocation& alloc) {
  ad::Vec x(genc.size() + alloc.bits.size());
  x.head(genc.size()) = genc;
  for (size_t m = 0; m < alloc.bits.size(); ++m) x[genc.size() + m] = alloc.bits[m];
  return x;
}

inline double value_r(const PolicyBundle& b, const ad::Vec& genc, const Allocation& a) {
  return b.critic_r.forward(critic_input(genc, a))[0];
}

inline double value_c(const PolicyBundle& b, const ad::Vec& genc, const Allocation& a) {
  return b.critic_c.forward(critic_input(genc, a))[0];
}

struct HighDecision {
  Allocation alloc;
  double log_prob = 0.0;
  double beta = 1.0;
  bool forced = true;
  bool sequential = false;
};

// Samples (or argmaxes, in greedy mode) an option from the composed policy
// pi_H = (1 - beta) * 1[w = w_prev] + beta * mu.
inline HighDecision act_high(const PolicyBundle& b, const GlobalState& s,
                             const ScenarioConfig& cfg, const Allocation& prev,
                             bool force_terminate, Rng& rng, bool greedy = false) {
  ad::Vec genc = encode_global(s, cfg);
  HighDecision d;
  d.forced = force_terminate;
  d.beta = 1.0;
  if (!force_terminate) {
    double logit = b.beta_net.forward(genc)[0];
    d.beta = 1.0 / (1.0 + std::exp(-logit));
  }

  std::vector<uint8_t> lay = lay_mask_of(s);
  int lay_count = 0;
  for (auto v : lay) lay_count += v;

  if (lay_count <= b.sizes.enum_cap) {
    auto support = option_space(lay, cfg.charger_count, b.sizes.enum_cap);
    auto mu = softmax(enum_option_logits(b.mu_scorer, genc, support));
    auto dist = compose_high_policy(support, mu, d.beta, prev);
    int idx;
    if (greedy) {
      idx = static_cast<int>(std::max_element(dist.probs.begin(), dist.probs.end()) -
                             dist.probs.begin());
    } else {
      idx = sample_categorical(dist.probs, rng);
    }
    d.alloc = dist.support[idx];
    d.log_prob = std::log(std::max(dist.probs[idx], 1e-300));
    return d;
  }

  // Sequential fallback: sample the mixture, then report the exact composed
  // likelihood from the marginal DP.
  d.sequential = true;
  AllocationSample pick;
  if (greedy) {
    // argmax per pick step is a practical mode for the PL head
    Rng greedy_rng(0);
    pick = seq_sample(b.seq_net, genc, lay, cfg.charger_count, greedy_rng);
    double keep_lp = seq_marginal_logprob(b.seq_net, genc, lay, cfg.charger_count, prev);
    if (!d.forced && (1.0 - d.beta) > d.beta * std::exp(pick.log_prob) &&
        prev.count() <= cfg.charger_count) {
      pick.alloc = prev;
      pick.log_prob = keep_lp;
    }
  } else if (!d.forced && rng.uniform() < 1.0 - d.beta) {
    pick.alloc = prev;
    pick.log_prob = seq_marginal_logprob(b.seq_net, genc, lay, cfg.charger_count, prev);
  } else {
    pick = seq_sample(b.seq_net, genc, lay, cfg.charger_count, rng);
  }
  double mu_lp = pick.log_prob;
  double pi;
  if (d.forced) {
    pi = std::exp(mu_lp);
  } else {
    double keep = pick.alloc == prev ? 1.0 - d.beta : 0.0;
    pi = keep + d.beta * std::exp(mu_lp);
  }
  d.alloc = pick.alloc;
  d.log_prob = std::log(std::max(pi, 1e-300));
  return d;
}

struct LowDecision {
  double power = 0.0;
  double z = 0.0;
  double log_prob = 0.0;
  double lo = 0.0;
  double hi = 0.0;
};

// Per-agent charging power from the shared squashed-gaussian actor. Callers
// must only invoke this for allocated EBs (lo < hi).
inline LowDecision act_low(const PolicyBundle& b, const GlobalState& s, int m,
                           const Allocation& alloc, const ScenarioConfig& cfg,
                           Rng& rng, bool greedy = false) {
  PowerRange range = feasible_power_range(s.locals[m], alloc.bits[m], cfg);
  LowDecision d;
  d.lo = range.lo;
  d.hi = range.hi;
  if (range.singleton()) {
    d.power = range.lo;
    d.z = 0.0;
    d.log_prob = 0.0;  // degenerate action, bypassing the head
    return d;
  }
  ad::Vec lenc = encode_local(s, m, alloc, cfg);
  double mean = b.low_actor.forward(lenc)[0];
  if (greedy) {
    d.z = mean;
    d.power = squash_to_bounds(mean, range.lo, range.hi);
    d.log_prob = squashed_logprob_from_z(d.z, mean, b.low_log_std.v[0], range.lo, range.hi);
    return d;
  }
  PowerSample ps = squashed_sample(mean, b.low_log_std.v[0], range.lo, range.hi, rng);
  d.power = ps.action;
  d.z = ps.z;
  d.log_prob = ps.log_prob;
  return d;
}

// --- bundle checkpoint --------------------------------------------------------

inline void save_bundle(const std::string& path, const PolicyBundle& b,
                        double lambda_high = 0.0, double lambda_low = 0.0) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw ConfigError("cannot open checkpoint for writing: " + path);
  save_mlp(os, b.mu_scorer);
  save_mlp(os, b.seq_net);
  save_mlp(os, b.beta_net);
  save_mlp(os, b.low_actor);
  save_mlp(os, b.critic_r);
  save_mlp(os, b.critic_c);
  detail::write_f64(os, b.low_log_std.v[0]);
  detail::write_f64(os, lambda_high);
  detail::write_f64(os, lambda_low);
}

inline PolicyBundle load_bundle(const std::string& path, double* lambda_high = nullptr,
                                double* lambda_low = nullptr) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ConfigError("cannot open checkpoint: " + path);
  PolicyBundle b;
  b.mu_scorer = load_mlp(is);
  b.seq_net = load_mlp(is);
  b.beta_net = load_mlp(is);
  b.low_actor = load_mlp(is);
  b.critic_r = load_mlp(is);
  b.critic_c = load_mlp(is);
  b.low_log_std = ad::ParamVec(1);
  b.low_log_std.v[0] = detail::read_f64(is);
  double lh = detail::read_f64(is);
  double ll = detail::read_f64(is);
  if (lambda_high) *lambda_high = lh;
  if (lambda_low) *lambda_low = ll;
  return b;
}

}  // namespace ebcsl
