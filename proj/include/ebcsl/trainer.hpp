#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include <json.hpp>

#include "ebcsl/optim.hpp"
#include "ebcsl/rollout.hpp"

namespace ebcsl {

struct LagrangeState {
  double lambda_high = 0.0;
  double lambda_low = 0.0;
  double tolerance = 0.025;   // d
  double lr = 0.01;           // alpha_lambda
};

// lambda <- ReLU(lambda + alpha * (J_safe - d)), per level.
inline void update_lambdas(LagrangeState& lag, double j_safe_high, double j_safe_low) {
  lag.lambda_high = std::max(0.0, lag.lambda_high + lag.lr * (j_safe_high - lag.tolerance));
  lag.lambda_low = std::max(0.0, lag.lambda_low + lag.lr * (j_safe_low - lag.tolerance));
}

struct TrainConfig {
  int iterations = 20000;
  int episodes_per_iter = 10;  // E
  int epochs_per_iter = 4;
  int batch_size = 128;
  double clip = 0.2;
  double gae_lambda = 0.95;
  double gamma = 0.99;         // GAE bootstrapping only; returns stay undiscounted
  double lr_actor = 3e-4;
  double lr_critic = 1e-3;
  double lr_lambda = 0.01;
  double tolerance = 0.025;
  double lambda_init = 0.0;
  double entropy_coef = 0.0;
  bool advantage_norm = true;
  bool fixed_penalty = false;  // ablation: constant lambda, no dual updates
  double fixed_lambda = 2.5;
  uint64_t seed = 1;
  int workers = 1;
  int ckpt_every = 0;
  PolicySizes sizes;

  void validate() const {
    if (!(clip > 0.0 && clip < 1.0)) throw ConfigError("train: clip must be in (0,1)");
    if (!(gae_lambda > 0.0 && gae_lambda <= 1.0))
      throw ConfigError("train: gae_lambda must be in (0,1]");
    if (!(gamma > 0.0 && gamma <= 1.0)) throw ConfigError("train: gamma must be in (0,1]");
    if (episodes_per_iter <= 0 || batch_size <= 0 || epochs_per_iter <= 0)
      throw ConfigError("train: non-positive loop parameter");
  }
};

inline TrainConfig train_config_from_json(const nlohmann::json& j) {
  TrainConfig tc;
  tc.iterations = j.value("iterations", tc.iterations);
  tc.episodes_per_iter = j.value("episodes_per_iter", tc.episodes_per_iter);
  tc.epochs_per_iter = j.value("epochs_per_iter", tc.epochs_per_iter);
  tc.batch_size = j.value("batch_size", tc.batch_size);
  tc.clip = j.value("clip", tc.clip);
  tc.gae_lambda = j.value("gae_lambda", tc.gae_lambda);
  tc.gamma = j.value("gamma", tc.gamma);
  tc.lr_actor = j.value("lr_actor", tc.lr_actor);
  tc.lr_critic = j.value("lr_critic", tc.lr_critic);
  tc.lr_lambda = j.value("lr_lambda", tc.lr_lambda);
  tc.tolerance = j.value("tolerance", tc.tolerance);
  tc.lambda_init = j.value("lambda_init", tc.lambda_init);
  tc.entropy_coef = j.value("entropy_coef", tc.entropy_coef);
  tc.advantage_norm = j.value("advantage_norm", tc.advantage_norm);
  tc.fixed_penalty = j.value("fixed_penalty", tc.fixed_penalty);
  tc.fixed_lambda = j.value("fixed_lambda", tc.fixed_lambda);
  tc.seed = j.value("seed", tc.seed);
  tc.workers = j.value("workers", tc.workers);
  tc.ckpt_every = j.value("ckpt_every", tc.ckpt_every);
  if (j.contains("sizes")) {
    const auto& s = j.at("sizes");
    tc.sizes.high_actor = s.value("high_actor", tc.sizes.high_actor);
    tc.sizes.termination = s.value("termination", tc.sizes.termination);
    tc.sizes.low_actor = s.value("low_actor", tc.sizes.low_actor);
    tc.sizes.critic = s.value("critic", tc.sizes.critic);
  }
  tc.validate();
  return tc;
}

// --- returns and advantages ----------------------------------------------------

// Undiscounted within-episode suffix sums of rewards and safety costs.
inline void compute_returns(const RolloutBuffer& buf, std::vector<double>* ret_r,
                            std::vector<double>* ret_c) {
  ret_r->assign(buf.rows.size(), 0.0);
  ret_c->assign(buf.rows.size(), 0.0);
  int t_cap = buf.steps_per_episode;
  for (int e = 0; e < buf.episodes; ++e) {
    double r = 0.0, c = 0.0;
    for (int t = t_cap - 1; t >= 0; --t) {
      size_t i = static_cast<size_t>(e) * t_cap + t;
      r += buf.rows[i].r_opr;
      c += buf.rows[i].c_safe;
      (*ret_r)[i] = r;
      (*ret_c)[i] = c;
    }
  }
}

// GAE over one episode: delta_t = x_t + gamma * v_{t+1} - v_t with v_T = 0,
// A_t = delta_t + gamma * lambda * A_{t+1}.
inline std::vector<double> gae_episode(const std::vector<double>& x,
                                       const std::vector<double>& v, double gamma,
                                       double lambda) {
  int t_cap = static_cast<int>(x.size());
  std::vector<double> adv(t_cap, 0.0);
  double acc = 0.0;
  for (int t = t_cap - 1; t >= 0; --t) {
    double v_next = t + 1 < t_cap ? v[t + 1] : 0.0;
    double delta = x[t] + gamma * v_next - v[t];
    acc = delta + gamma * lambda * acc;
    adv[t] = acc;
  }
  return adv;
}

// Per-row advantages for both streams. The critic inputs (S_t, w_t) serve the
// high and the low level alike, so one advantage per stream feeds both
// surrogates (scaled by the level's own multiplier later).
inline void gae_advantages(const RolloutBuffer& buf, double gamma, double gae_lambda,
                           std::vector<double>* adv_opr, std::vector<double>* adv_safe) {
  adv_opr->assign(buf.rows.size(), 0.0);
  adv_safe->assign(buf.rows.size(), 0.0);
  int t_cap = buf.steps_per_episode;
  std::vector<double> x(t_cap), vr(t_cap), c(t_cap), vc(t_cap);
  for (int e = 0; e < buf.episodes; ++e) {
    for (int t = 0; t < t_cap; ++t) {
      const auto& row = buf.row(e, t);
      x[t] = row.r_opr;
      vr[t] = row.v_r;
      c[t] = row.c_safe;
      vc[t] = row.v_c;
    }
    auto ar = gae_episode(x, vr, gamma, gae_lambda);
    auto ac = gae_episode(c, vc, gamma, gae_lambda);
    for (int t = 0; t < t_cap; ++t) {
      (*adv_opr)[static_cast<size_t>(e) * t_cap + t] = ar[t];
      (*adv_safe)[static_cast<size_t>(e) * t_cap + t] = ac[t];
    }
  }
}

inline std::vector<double> adjusted_advantages(const std::vector<double>& adv_opr,
                                               const std::vector<double>& adv_safe,
                                               double lambda) {
  if (adv_opr.size() != adv_safe.size())
    throw ContractViolation("adjusted_advantages: length mismatch");
  std::vector<double> out(adv_opr.size());
  for (size_t i = 0; i < out.size(); ++i) out[i] = adv_opr[i] - lambda * adv_safe[i];
  return out;
}

inline void normalize_in_place(std::vector<double>* v) {
  if (v->empty()) return;
  double mean = std::accumulate(v->begin(), v->end(), 0.0) / v->size();
  double var = 0.0;
  for (double x : *v) var += (x - mean) * (x - mean);
  double sd = std::sqrt(var / v->size());
  for (double& x : *v) x = (x - mean) / (sd + 1e-8);
}

// --- likelihoods under current parameters ---------------------------------------

inline double high_logprob_raw(const PolicyBundle& policy, const StepRecord& row,
                               const ScenarioConfig& cfg) {
  Allocation alloc{row.alloc_bits};
  Allocation prev{row.prev_bits};
  double beta = 1.0;
  if (!row.forced) {
    double logit = policy.beta_net.forward(row.genc)[0];
    beta = 1.0 / (1.0 + std::exp(-logit));
  }
  if (!row.sequential) {
    auto support = option_space(row.lay_mask, cfg.charger_count, policy.sizes.enum_cap);
    auto mu = softmax(enum_option_logits(policy.mu_scorer, row.genc, support));
    auto dist = compose_high_policy(support, mu, beta, prev);
    int idx = find_in_support(support, alloc);
    if (idx < 0) throw ContractViolation("high_logprob: sampled option not in support");
    return std::log(std::max(dist.probs[idx], 1e-300));
  }
  double mu_lp = seq_marginal_logprob(policy.seq_net, row.genc, row.lay_mask,
                                      cfg.charger_count, alloc);
  double keep = alloc == prev ? 1.0 - beta : 0.0;
  double pi = row.forced ? std::exp(mu_lp) : keep + beta * std::exp(mu_lp);
  return std::log(std::max(pi, 1e-300));
}

inline double low_logprob_raw(const PolicyBundle& policy, const StepRecord& row, int j) {
  double mean = policy.low_actor.forward(row.lencs[j])[0];
  return squashed_logprob_from_z(row.z[j], mean, policy.low_log_std.v[0], row.lo[j],
                                 row.hi[j]);
}

// --- objective evaluation (full batch, no gradients) ----------------------------

inline double clipped_term(double ratio, double adv, double eps) {
  double clipped = std::min(1.0 + eps, std::max(1.0 - eps, ratio));
  return std::min(ratio * adv, clipped * adv);
}

inline double high_ppo_objective(const RolloutBuffer& buf, const PolicyBundle& policy,
                                 const ScenarioConfig& cfg,
                                 const std::vector<double>& adv_adj_high, double clip_eps,
                                 int* skipped = nullptr) {
  double total = 0.0;
  int used = 0, bad = 0;
  for (size_t i = 0; i < buf.rows.size(); ++i) {
    double lp = high_logprob_raw(policy, buf.rows[i], cfg);
    double ratio = std::exp(lp - buf.rows[i].logp_high);
    if (!std::isfinite(ratio)) {
      ++bad;
      continue;
    }
    total += clipped_term(ratio, adv_adj_high[i], clip_eps);
    ++used;
  }
  if (skipped) *skipped = bad;
  return used > 0 ? total / used : 0.0;
}

inline double low_mappo_objective(const RolloutBuffer& buf, const PolicyBundle& policy,
                                  const std::vector<double>& adv_adj_low,
                                  double clip_eps, int* skipped = nullptr) {
  double total = 0.0;
  int used = 0, bad = 0;
  for (size_t i = 0; i < buf.rows.size(); ++i) {
    const auto& row = buf.rows[i];
    for (size_t j = 0; j < row.agents.size(); ++j) {
      double lp = low_logprob_raw(policy, row, static_cast<int>(j));
      double ratio = std::exp(lp - row.logp_low[j]);
      if (!std::isfinite(ratio)) {
        ++bad;
        continue;
      }
      total += clipped_term(ratio, adv_adj_low[i], clip_eps);
      ++used;
    }
  }
  if (skipped) *skipped = bad;
  return used > 0 ? total / used : 0.0;
}

inline std::pair<double, double> critic_objectives(const RolloutBuffer& buf,
                                                   const PolicyBundle& policy,
                                                   const std::vector<double>& ret_r,
                                                   const std::vector<double>& ret_c) {
  double mse_r = 0.0, mse_c = 0.0;
  for (size_t i = 0; i < buf.rows.size(); ++i) {
    Allocation alloc{buf.rows[i].alloc_bits};
    ad::Vec x = critic_input(buf.rows[i].genc, alloc);
    double er = policy.critic_r.forward(x)[0] - ret_r[i];
    double ec = policy.critic_c.forward(x)[0] - ret_c[i];
    mse_r += er * er;
    mse_c += ec * ec;
  }
  size_t n = std::max<size_t>(1, buf.rows.size());
  return {mse_r / n, mse_c / n};
}

struct IterationMetrics {
  int iteration = 0;
  double mean_return = 0.0;   // mean episode R_0
  double mean_safety = 0.0;   // mean episode C_0 (the J_safe estimate)
  double lambda_high = 0.0;
  double lambda_low = 0.0;
  double loss_high = 0.0;     // surrogate objectives before this update
  double loss_low = 0.0;
  double mse_r = 0.0;
  double mse_c = 0.0;
  double wall_ms = 0.0;
  int skipped_ratios = 0;
};

inline void metrics_header(std::ostream& os) {
  os << "iteration,mean_return,mean_safety,lambda_H,lambda_L,loss_H,loss_L,"
        "mse_R,mse_C,wall_ms\n";
}

inline void metrics_row(std::ostream& os, const IterationMetrics& m) {
  os.precision(17);
  os << m.iteration << ',' << m.mean_return << ',' << m.mean_safety << ','
     << m.lambda_high << ',' << m.lambda_low << ',' << m.loss_high << ','
     << m.loss_low << ',' << m.mse_r << ',' << m.mse_c << ',' << m.wall_ms << '\n';
}

struct TrainAbort : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// DAC-MAPPO-Lagrangian: per iteration, collect E episodes under the frozen
// snapshot, compute undiscounted returns, GAE advantages for the reward and
// cost streams, adjusted advantages per level, run clipped-surrogate ascent on
// the high-level (mu + termination) and low-level (shared actor) policies,
// regress the two critics on the returns, and finish with the projected dual
// updates.
class Trainer {
 public:
  Trainer(ScenarioConfig cfg, TrainConfig tc)
      : cfg_(std::move(cfg)),
        tc_(tc),
        policy_(PolicyBundle::make(cfg_, tc.sizes, tc.seed)),
        opt_high_(high_params(), {}, tc.lr_actor),
        opt_low_(low_params(), {&policy_.low_log_std}, tc.lr_actor),
        opt_critic_(critic_params(), {}, tc.lr_critic) {
    lag_.tolerance = tc.tolerance;
    lag_.lr = tc.lr_lambda;
    lag_.lambda_high = tc.fixed_penalty ? tc.fixed_lambda : tc.lambda_init;
    lag_.lambda_low = tc.fixed_penalty ? tc.fixed_lambda : tc.lambda_init;
  }

  PolicyBundle& policy() { return policy_; }
  const PolicyBundle& policy() const { return policy_; }
  const LagrangeState& lagrange() const { return lag_; }
  const ScenarioConfig& scenario() const { return cfg_; }
  int iteration() const { return iteration_; }
  void set_crash_dump_path(std::string p) { crash_path_ = std::move(p); }

  IterationMetrics train_iteration() {
    auto t0 = std::chrono::steady_clock::now();
    int iter = iteration_++;

    RolloutBuffer buf = collect_rollouts(cfg_, policy_, tc_.episodes_per_iter,
                                         mix_seed(tc_.seed, 0xC0DE + iter), tc_.workers);

    std::vector<double> ret_r, ret_c, adv_opr, adv_safe;
    compute_returns(buf, &ret_r, &ret_c);
    gae_advantages(buf, tc_.gamma, tc_.gae_lambda, &adv_opr, &adv_safe);
    auto adj_high = adjusted_advantages(adv_opr, adv_safe, lag_.lambda_high);
    auto adj_low = adjusted_advantages(adv_opr, adv_safe, lag_.lambda_low);
    if (tc_.advantage_norm) {
      normalize_in_place(&adj_high);
      normalize_in_place(&adj_low);
    }

    IterationMetrics m;
    m.iteration = iter;
    for (int e = 0; e < buf.episodes; ++e) {
      m.mean_return += ret_r[static_cast<size_t>(e) * buf.steps_per_episode];
      m.mean_safety += ret_c[static_cast<size_t>(e) * buf.steps_per_episode];
    }
    m.mean_return /= buf.episodes;
    m.mean_safety /= buf.episodes;
    m.lambda_high = lag_.lambda_high;
    m.lambda_low = lag_.lambda_low;

    int skipped_h = 0, skipped_l = 0;
    m.loss_high = high_ppo_objective(buf, policy_, cfg_, adj_high, tc_.clip, &skipped_h);
    m.loss_low = low_mappo_objective(buf, policy_, adj_low, tc_.clip, &skipped_l);
    auto [mse_r0, mse_c0] = critic_objectives(buf, policy_, ret_r, ret_c);
    m.mse_r = mse_r0;
    m.mse_c = mse_c0;
    m.skipped_ratios = skipped_h + skipped_l;

    if (!std::isfinite(m.loss_high) || !std::isfinite(m.loss_low) ||
        !std::isfinite(m.mse_r) || !std::isfinite(m.mse_c)) {
      if (!crash_path_.empty())
        save_bundle(crash_path_, policy_, lag_.lambda_high, lag_.lambda_low);
      throw TrainAbort("non-finite loss at iteration " + std::to_string(iter) +
                       (crash_path_.empty() ? "" : ", checkpoint dumped to " + crash_path_));
    }

    Rng shuffle_rng(mix_seed(tc_.seed, 0xA110 + iter));
    update_high(buf, adj_high, shuffle_rng);
    update_low(buf, adj_low, shuffle_rng);
    update_critics(buf, ret_r, ret_c, shuffle_rng);

    if (!tc_.fixed_penalty) update_lambdas(lag_, m.mean_safety, m.mean_safety);

    auto t1 = std::chrono::steady_clock::now();
    m.wall_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
    return m;
  }

 private:
  std::vector<ad::Linear*> high_params() {
    std::vector<ad::Linear*> out;
    for (auto& l : policy_.mu_scorer.layers) out.push_back(&l);
    for (auto& l : policy_.seq_net.layers) out.push_back(&l);
    for (auto& l : policy_.beta_net.layers) out.push_back(&l);
    return out;
  }

  std::vector<ad::Linear*> low_params() {
    std::vector<ad::Linear*> out;
    for (auto& l : policy_.low_actor.layers) out.push_back(&l);
    return out;
  }

  std::vector<ad::Linear*> critic_params() {
    std::vector<ad::Linear*> out;
    for (auto& l : policy_.critic_r.layers) out.push_back(&l);
    for (auto& l : policy_.critic_c.layers) out.push_back(&l);
    return out;
  }

  std::vector<size_t> shuffled_indices(size_t n, Rng& rng) {
    std::vector<size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    for (size_t i = n; i > 1; --i)
      std::swap(idx[i - 1], idx[rng.uniform_int(0, static_cast<int>(i) - 1)]);
    return idx;
  }

  // scalar node for pi_H(w_t | S_t) under current parameters
  int high_logprob_node(ad::Tape& tape, const StepRecord& row) {
    Allocation alloc{row.alloc_bits};
    Allocation prev{row.prev_bits};
    int mu_lp;
    int prev_idx = -1;
    if (!row.sequential) {
      auto support = option_space(row.lay_mask, cfg_.charger_count, policy_.sizes.enum_cap);
      int lsm = tape.log_softmax(enum_logits_node(tape, policy_.mu_scorer, row.genc, support));
      int idx = find_in_support(support, alloc);
      if (idx < 0) throw ContractViolation("update: sampled option not in support");
      prev_idx = find_in_support(support, prev);
      mu_lp = tape.pick(lsm, idx);
      if (row.forced) return mu_lp;
      int beta = tape.sigmoid_(policy_.beta_net.forward(tape, tape.input(row.genc)));
      int keep = tape.scalar(idx == prev_idx ? 1.0 : 0.0);
      int pi = tape.add(tape.mul(beta, tape.exp_(mu_lp)),
                        tape.mul(tape.add_const(tape.neg(beta), 1.0), keep));
      return tape.log_(pi);
    }
    mu_lp = seq_marginal_logprob_node(tape, policy_.seq_net, row.genc, row.lay_mask,
                                      cfg_.charger_count, alloc);
    if (row.forced) return mu_lp;
    int beta = tape.sigmoid_(policy_.beta_net.forward(tape, tape.input(row.genc)));
    int keep = tape.scalar(alloc == prev ? 1.0 : 0.0);
    int pi = tape.add(tape.mul(beta, tape.exp_(mu_lp)),
                      tape.mul(tape.add_const(tape.neg(beta), 1.0), keep));
    return tape.log_(pi);
  }

  void update_high(const RolloutBuffer& buf, const std::vector<double>& adj, Rng& rng) {
    for (int epoch = 0; epoch < tc_.epochs_per_iter; ++epoch) {
      auto order = shuffled_indices(buf.rows.size(), rng);
      for (size_t start = 0; start < order.size(); start += tc_.batch_size) {
        size_t end = std::min(order.size(), start + tc_.batch_size);
        ad::Tape tape;
        std::vector<int> terms;
        for (size_t q = start; q < end; ++q) {
          const StepRecord& row = buf.rows[order[q]];
          int lp = high_logprob_node(tape, row);
          int ratio = tape.exp_(tape.add_const(lp, -row.logp_high));
          if (!std::isfinite(tape.scalar_value(ratio))) continue;
          double a = adj[order[q]];
          int term = tape.min_(tape.scale(ratio, a),
                               tape.scale(tape.clip(ratio, 1.0 - tc_.clip, 1.0 + tc_.clip), a));
          if (tc_.entropy_coef > 0.0 && !row.sequential) {
            auto support = option_space(row.lay_mask, cfg_.charger_count,
                                        policy_.sizes.enum_cap);
            int lsm = tape.log_softmax(
                enum_logits_node(tape, policy_.mu_scorer, row.genc, support));
            int ent = tape.neg(tape.sum(tape.mul(tape.exp_(lsm), lsm)));
            term = tape.add(term, tape.scale(ent, tc_.entropy_coef));
          }
          terms.push_back(term);
        }
        if (terms.empty()) continue;
        int loss = tape.neg(tape.mean(tape.stack(terms)));
        opt_high_.zero_grad();
        tape.backward(loss);
        opt_high_.step();
      }
    }
  }

  void update_low(const RolloutBuffer& buf, const std::vector<double>& adj, Rng& rng) {
    for (int epoch = 0; epoch < tc_.epochs_per_iter; ++epoch) {
      auto order = shuffled_indices(buf.rows.size(), rng);
      for (size_t start = 0; start < order.size(); start += tc_.batch_size) {
        size_t end = std::min(order.size(), start + tc_.batch_size);
        ad::Tape tape;
        int log_std = tape.param(policy_.low_log_std);
        std::vector<int> terms;
        for (size_t q = start; q < end; ++q) {
          const StepRecord& row = buf.rows[order[q]];
          for (size_t j = 0; j < row.agents.size(); ++j) {
            int mean = policy_.low_actor.forward(tape, tape.input(row.lencs[j]));
            int lp = squashed_logprob_node(tape, mean, log_std, row.z[j], row.lo[j],
                                           row.hi[j]);
            int ratio = tape.exp_(tape.add_const(lp, -row.logp_low[j]));
            if (!std::isfinite(tape.scalar_value(ratio))) continue;
            double a = adj[order[q]];
            terms.push_back(
                tape.min_(tape.scale(ratio, a),
                          tape.scale(tape.clip(ratio, 1.0 - tc_.clip, 1.0 + tc_.clip), a)));
          }
        }
        if (terms.empty()) continue;
        int loss = tape.neg(tape.mean(tape.stack(terms)));
        opt_low_.zero_grad();
        tape.backward(loss);
        opt_low_.step();
      }
    }
  }

  void update_critics(const RolloutBuffer& buf, const std::vector<double>& ret_r,
                      const std::vector<double>& ret_c, Rng& rng) {
    for (int epoch = 0; epoch < tc_.epochs_per_iter; ++epoch) {
      auto order = shuffled_indices(buf.rows.size(), rng);
      for (size_t start = 0; start < order.size(); start += tc_.batch_size) {
        size_t end = std::min(order.size(), start + tc_.batch_size);
        ad::Tape tape;
        std::vector<int> terms_r, terms_c;
        for (size_t q = start; q < end; ++q) {
          const StepRecord& row = buf.rows[order[q]];
          Allocation alloc{row.alloc_bits};
          int x = tape.input(critic_input(row.genc, alloc));
          int vr = policy_.critic_r.forward(tape, x);
          int vc = policy_.critic_c.forward(tape, x);
          terms_r.push_back(tape.square(tape.add_const(vr, -ret_r[order[q]])));
          terms_c.push_back(tape.square(tape.add_const(vc, -ret_c[order[q]])));
        }
        if (terms_r.empty()) continue;
        int loss = tape.add(tape.mean(tape.stack(terms_r)), tape.mean(tape.stack(terms_c)));
        opt_critic_.zero_grad();
        tape.backward(loss);
        opt_critic_.step();
      }
    }
  }

  ScenarioConfig cfg_;
  TrainConfig tc_;
  PolicyBundle policy_;
  Adam opt_high_, opt_low_, opt_critic_;
  LagrangeState lag_;
  int iteration_ = 0;
  std::string crash_path_;
};

}  // namespace ebcsl
