#include <catch2/catch_amalgamated.hpp>

#include "ebcsl/trainer.hpp"
#include "scenarios.hpp"

using namespace ebcsl;
using ebcsl::testing::micro_scenario;

namespace {

PolicySizes tiny_sizes() {
  PolicySizes s;
  s.high_actor = {16, 16};
  s.termination = {8, 8};
  s.low_actor = {16, 16};
  s.critic = {16, 16};
  return s;
}

// Brute-force GAE: A_t = sum_l (gamma*lambda)^l * delta_{t+l}, straight from
// the definition with an explicit double loop.
std::vector<double> gae_brute(const std::vector<double>& x, const std::vector<double>& v,
                              double gamma, double lambda) {
  int t_cap = static_cast<int>(x.size());
  std::vector<double> adv(t_cap, 0.0);
  for (int t = 0; t < t_cap; ++t) {
    double coeff = 1.0;
    for (int l = 0; t + l < t_cap; ++l) {
      double v_next = t + l + 1 < t_cap ? v[t + l + 1] : 0.0;
      double delta = x[t + l] + gamma * v_next - v[t + l];
      adv[t] += coeff * delta;
      coeff *= gamma * lambda;
    }
  }
  return adv;
}

}  // namespace

TEST_CASE("returns are within-episode suffix sums") {
  RolloutBuffer buf;
  buf.episodes = 2;
  buf.steps_per_episode = 3;
  buf.rows.resize(6);
  double rewards[6] = {1, 2, 3, 5, 7, 11};
  for (int i = 0; i < 6; ++i) {
    buf.rows[i].r_opr = rewards[i];
    buf.rows[i].c_safe = 0.0;
  }
  std::vector<double> rr, rc;
  compute_returns(buf, &rr, &rc);
  REQUIRE(rr[0] == 6.0);
  REQUIRE(rr[1] == 5.0);
  REQUIRE(rr[2] == 3.0);
  REQUIRE(rr[3] == 23.0);  // episodes do not leak into each other
  for (double c : rc) REQUIRE(c == 0.0);
}

TEST_CASE("gae hand example") {
  // gamma=1, lambda=0.95, rewards [1,0], values [0,0] -> A = [1, 0]
  auto adv = gae_episode({1.0, 0.0}, {0.0, 0.0}, 1.0, 0.95);
  REQUIRE(adv[0] == Catch::Approx(1.0).margin(1e-15));
  REQUIRE(adv[1] == Catch::Approx(0.0).margin(1e-15));
}

TEST_CASE("perfect critic zeroes gae at lambda 1") {
  std::vector<double> x = {2.0, -1.0, 0.5, 3.0};
  std::vector<double> v(4);
  double acc = 0.0;
  for (int t = 3; t >= 0; --t) {
    acc += x[t];
    v[t] = acc;
  }
  auto adv = gae_episode(x, v, 1.0, 1.0);
  for (double a : adv) REQUIRE(std::fabs(a) < 1e-12);
}

TEST_CASE("gae equals suffix return minus value at gamma=lambda=1") {
  Rng rng(21);
  for (int trial = 0; trial < 1000; ++trial) {
    int t_cap = rng.uniform_int(1, 5);
    std::vector<double> x(t_cap), v(t_cap);
    for (int t = 0; t < t_cap; ++t) {
      x[t] = rng.uniform(-3.0, 3.0);
      v[t] = rng.uniform(-3.0, 3.0);
    }
    auto adv = gae_episode(x, v, 1.0, 1.0);
    double suffix = 0.0;
    std::vector<double> ret(t_cap);
    for (int t = t_cap - 1; t >= 0; --t) {
      suffix += x[t];
      ret[t] = suffix;
    }
    for (int t = 0; t < t_cap; ++t)
      REQUIRE(adv[t] == Catch::Approx(ret[t] - v[t]).margin(1e-10));
  }
}

TEST_CASE("gae matches the brute-force recursion oracle at (0.99, 0.95)") {
  Rng rng(22);
  for (int trial = 0; trial < 500; ++trial) {
    int t_cap = rng.uniform_int(1, 8);
    std::vector<double> x(t_cap), v(t_cap);
    for (int t = 0; t < t_cap; ++t) {
      x[t] = rng.uniform(-2.0, 2.0);
      v[t] = rng.uniform(-2.0, 2.0);
    }
    auto fast = gae_episode(x, v, 0.99, 0.95);
    auto slow = gae_brute(x, v, 0.99, 0.95);
    for (int t = 0; t < t_cap; ++t)
      REQUIRE(fast[t] == Catch::Approx(slow[t]).margin(1e-12));
  }
}

TEST_CASE("adjusted advantages") {
  std::vector<double> opr = {1.0, 2.0, -1.0};
  std::vector<double> safe = {2.0, 0.0, 4.0};
  SECTION("lambda 0 is the unconstrained limit") {
    auto adj = adjusted_advantages(opr, safe, 0.0);
    REQUIRE(adj == opr);
  }
  SECTION("arithmetic with lambda 2.5") {
    auto adj = adjusted_advantages(opr, safe, 2.5);
    REQUIRE(adj[0] == Catch::Approx(-4.0).margin(1e-15));
    REQUIRE(adj[1] == Catch::Approx(2.0).margin(1e-15));
  }
  SECTION("zero safety stream changes nothing") {
    auto adj = adjusted_advantages(opr, {0.0, 0.0, 0.0}, 5.0);
    REQUIRE(adj == opr);
  }
}

TEST_CASE("dual updates") {
  SECTION("worked arithmetic from the hyperparameter table") {
    LagrangeState lag;
    lag.lambda_high = 0.5;
    lag.lambda_low = 0.5;
    lag.tolerance = 0.025;
    lag.lr = 0.01;
    update_lambdas(lag, 0.125, 0.125);
    REQUIRE(lag.lambda_high == Catch::Approx(0.501).margin(1e-12));
    REQUIRE(lag.lambda_low == Catch::Approx(0.501).margin(1e-12));
  }
  SECTION("projection floors at zero") {
    LagrangeState lag;
    lag.lambda_high = 0.0;
    update_lambdas(lag, 0.0, 0.0);
    REQUIRE(lag.lambda_high == 0.0);
  }
  SECTION("equilibrium at the tolerance") {
    LagrangeState lag;
    lag.lambda_high = 0.3;
    update_lambdas(lag, lag.tolerance, lag.tolerance);
    REQUIRE(lag.lambda_high == Catch::Approx(0.3).margin(1e-15));
  }
  SECTION("monotone while the constraint is violated, decreasing when slack") {
    LagrangeState lag;
    Rng rng(5);
    double prev = lag.lambda_high;
    for (int i = 0; i < 50; ++i) {
      update_lambdas(lag, lag.tolerance + rng.uniform(0.01, 1.0), 0.0);
      REQUIRE(lag.lambda_high >= prev);
      prev = lag.lambda_high;
    }
    for (int i = 0; i < 50 && lag.lambda_high > 0.0; ++i) {
      update_lambdas(lag, lag.tolerance - 0.01, 0.0);
      REQUIRE(lag.lambda_high < prev);
      prev = lag.lambda_high;
    }
  }
}

TEST_CASE("collect_rollouts shapes and determinism") {
  ScenarioConfig cfg = micro_scenario(3);
  PolicyBundle policy = PolicyBundle::make(cfg, tiny_sizes(), 7);
  RolloutBuffer a = collect_rollouts(cfg, policy, 2, 99);
  REQUIRE(static_cast<int>(a.rows.size()) == 2 * cfg.steps());
  RolloutBuffer b = collect_rollouts(cfg, policy, 2, 99);
  for (size_t i = 0; i < a.rows.size(); ++i) {
    REQUIRE(a.rows[i].r_opr == b.rows[i].r_opr);
    REQUIRE(a.rows[i].logp_high == b.rows[i].logp_high);
    REQUIRE(a.rows[i].alloc_bits == b.rows[i].alloc_bits);
  }
  SECTION("worker count does not change the buffer") {
    RolloutBuffer c = collect_rollouts(cfg, policy, 2, 99, 2);
    for (size_t i = 0; i < a.rows.size(); ++i) {
      REQUIRE(a.rows[i].r_opr == c.rows[i].r_opr);
      REQUIRE(a.rows[i].logp_high == c.rows[i].logp_high);
    }
  }
  SECTION("controlled mask matches the sampled allocation") {
    for (const auto& row : a.rows) {
      for (int agent : row.agents) REQUIRE(row.alloc_bits[agent] == 1);
      for (size_t j = 0; j < row.agents.size(); ++j) REQUIRE(row.lo[j] < row.hi[j]);
    }
  }
  SECTION("first step of each episode is forced") {
    REQUIRE(a.row(0, 0).forced);
    REQUIRE(a.row(1, 0).forced);
  }
}

TEST_CASE("on-policy identity: objectives equal mean advantages before updates") {
  ScenarioConfig cfg = micro_scenario(4);
  PolicyBundle policy = PolicyBundle::make(cfg, tiny_sizes(), 11);
  RolloutBuffer buf = collect_rollouts(cfg, policy, 3, 123);
  std::vector<double> rr, rc, ao, as;
  compute_returns(buf, &rr, &rc);
  gae_advantages(buf, 0.99, 0.95, &ao, &as);
  auto adj = adjusted_advantages(ao, as, 0.7);

  int skipped = 0;
  double obj = high_ppo_objective(buf, policy, cfg, adj, 0.2, &skipped);
  REQUIRE(skipped == 0);
  double mean_adv = 0.0;
  for (double a : adj) mean_adv += a;
  mean_adv /= adj.size();
  REQUIRE(obj == Catch::Approx(mean_adv).margin(1e-6));

  double obj_low = low_mappo_objective(buf, policy, adj, 0.2, &skipped);
  double mean_ctrl = 0.0;
  int n_ctrl = 0;
  for (size_t i = 0; i < buf.rows.size(); ++i)
    for (size_t j = 0; j < buf.rows[i].agents.size(); ++j) {
      mean_ctrl += adj[i];
      ++n_ctrl;
    }
  if (n_ctrl > 0) {
    mean_ctrl /= n_ctrl;
    REQUIRE(obj_low == Catch::Approx(mean_ctrl).margin(1e-6));
  }
}

TEST_CASE("clipped surrogate arithmetic") {
  SECTION("ratio above the band with positive advantage clips to 1.2") {
    REQUIRE(clipped_term(1.5, 2.0, 0.2) == Catch::Approx(1.2 * 2.0).margin(1e-15));
  }
  SECTION("negative advantage keeps the larger-magnitude term") {
    // min(2*(-1), 1.2*(-1)) = -2
    REQUIRE(clipped_term(2.0, -1.0, 0.2) == Catch::Approx(-2.0).margin(1e-15));
  }
  SECTION("invariant to rescaling beyond the band for positive advantages") {
    double base = clipped_term(1.2, 3.0, 0.2);
    for (double r : {1.3, 2.0, 7.5, 100.0})
      REQUIRE(clipped_term(r, 3.0, 0.2) == Catch::Approx(base).margin(1e-12));
  }
  SECTION("two-agent mean example") {
    double term0 = clipped_term(1.0, -1.0, 0.2);
    double term1 = clipped_term(2.0, -1.0, 0.2);
    REQUIRE((term0 + term1) / 2.0 == Catch::Approx(-1.5).margin(1e-15));
  }
}

TEST_CASE("critic mse example") {
  // predictions [0,0] vs targets [2,4] -> (4+16)/2 = 10
  RolloutBuffer buf;
  buf.episodes = 1;
  buf.steps_per_episode = 2;
  buf.rows.resize(2);
  ScenarioConfig cfg = micro_scenario(5);
  PolicyBundle policy = PolicyBundle::make(cfg, tiny_sizes(), 2);
  for (auto& l : policy.critic_r.layers) {
    l.w.setZero();
    l.b.setZero();
  }
  for (auto& l : policy.critic_c.layers) {
    l.w.setZero();
    l.b.setZero();
  }
  for (auto& row : buf.rows) {
    row.genc = ad::Vec::Zero(global_encoding_dim(cfg));
    row.alloc_bits.assign(cfg.fleet_size, 0);
  }
  auto [mr, mc] = critic_objectives(buf, policy, {2.0, 4.0}, {2.0, 4.0});
  REQUIRE(mr == Catch::Approx(10.0).margin(1e-12));
  REQUIRE(mc == Catch::Approx(10.0).margin(1e-12));
}

TEST_CASE("high-level gradient reaches the termination network") {
  ScenarioConfig cfg = micro_scenario(6);
  PolicyBundle policy = PolicyBundle::make(cfg, tiny_sizes(), 13);
  RolloutBuffer buf = collect_rollouts(cfg, policy, 2, 7);
  std::vector<double> ao, as;
  gae_advantages(buf, 0.99, 0.95, &ao, &as);

  // need at least one non-forced step for beta to matter
  bool any_soft = false;
  for (const auto& row : buf.rows) any_soft |= !row.forced;
  REQUIRE(any_soft);

  double eps = 1e-5;
  ad::Vec p = policy.beta_net.params_flat();
  int coord = static_cast<int>(p.size()) / 2;
  ad::Vec pp = p;
  pp[coord] += eps;
  policy.beta_net.set_params_flat(pp);
  double up = high_ppo_objective(buf, policy, cfg, ao, 0.2);
  pp[coord] = p[coord] - eps;
  policy.beta_net.set_params_flat(pp);
  double down = high_ppo_objective(buf, policy, cfg, ao, 0.2);
  policy.beta_net.set_params_flat(p);
  REQUIRE(std::fabs(up - down) > 0.0);
}

TEST_CASE("train_iteration runs, logs and stays deterministic") {
  ScenarioConfig cfg = micro_scenario(8);
  TrainConfig tc;
  tc.sizes = tiny_sizes();
  tc.episodes_per_iter = 2;
  tc.epochs_per_iter = 2;
  tc.batch_size = 16;
  tc.seed = 31;
  tc.workers = 1;

  Trainer a(cfg, tc), b(cfg, tc);
  for (int i = 0; i < 3; ++i) {
    IterationMetrics ma = a.train_iteration();
    IterationMetrics mb = b.train_iteration();
    REQUIRE(ma.mean_return == mb.mean_return);
    REQUIRE(ma.mean_safety == mb.mean_safety);
    REQUIRE(ma.loss_high == mb.loss_high);
    REQUIRE(ma.loss_low == mb.loss_low);
    REQUIRE(ma.mse_r == mb.mse_r);
    REQUIRE(ma.lambda_high == mb.lambda_high);
  }
  REQUIRE((a.policy().mu_scorer.params_flat() - b.policy().mu_scorer.params_flat())
              .norm() == 0.0);
}

TEST_CASE("lambda stays put in fixed-penalty mode and zero-init unconstrained mode") {
  ScenarioConfig cfg = micro_scenario(9);
  TrainConfig tc;
  tc.sizes = tiny_sizes();
  tc.episodes_per_iter = 1;
  tc.epochs_per_iter = 1;
  tc.batch_size = 32;
  tc.seed = 5;

  SECTION("fixed penalty pins lambda at 2.5") {
    tc.fixed_penalty = true;
    tc.fixed_lambda = 2.5;
    Trainer t(cfg, tc);
    for (int i = 0; i < 2; ++i) {
      IterationMetrics m = t.train_iteration();
      REQUIRE(m.lambda_high == 2.5);
      REQUIRE(m.lambda_low == 2.5);
    }
  }
  SECTION("alpha_lambda=0 with lambda 0 reduces to unconstrained updates") {
    tc.lr_lambda = 0.0;
    Trainer t(cfg, tc);
    t.train_iteration();
    IterationMetrics m = t.train_iteration();
    REQUIRE(m.lambda_high == 0.0);
    REQUIRE(m.lambda_low == 0.0);
  }
}
