#include <catch2/catch_amalgamated.hpp>

#include <functional>
#include <map>

#include "ebcsl/heads.hpp"

using namespace ebcsl;

TEST_CASE("zero-std squash lands at the midpoint") {
  Rng rng(1);
  PowerSample s = squashed_sample(0.0, -30.0, 0.0, 120.0, rng);  // log_std clamps to -5
  REQUIRE(s.action == Catch::Approx(60.0).margin(2.0));
  REQUIRE(squash_to_bounds(0.0, 0.0, 120.0) == 60.0);
}

TEST_CASE("squash arithmetic on the charger bounds") {
  REQUIRE(squash_to_bounds(0.0, 0.0, 120.0) == Catch::Approx(60.0));
  // the sampler clips z to +-9, which keeps the squash strictly interior
  REQUIRE(squash_to_bounds(kZClip, 0.0, 120.0) < 120.0);
  REQUIRE(squash_to_bounds(-kZClip, 0.0, 120.0) > 0.0);
}

TEST_CASE("samples stay strictly inside the bounds") {
  Rng rng(2);
  for (int trial = 0; trial < 5000; ++trial) {
    double lo = rng.uniform(-120.0, 50.0);
    double hi = lo + rng.uniform(0.5, 200.0);
    double mean = rng.uniform(-8.0, 8.0);
    double ls = rng.uniform(-6.0, 3.0);
    PowerSample s = squashed_sample(mean, ls, lo, hi, rng);
    REQUIRE(s.action > lo);
    REQUIRE(s.action < hi);
    REQUIRE(std::isfinite(s.log_prob));
  }
}

TEST_CASE("degenerate bounds are a contract violation") {
  Rng rng(3);
  REQUIRE_THROWS_AS(squashed_sample(0.0, 0.0, 5.0, 5.0, rng), ContractViolation);
}

TEST_CASE("density integrates to one over the bounds") {
  double lo = 0.0, hi = 120.0;
  for (double mean : {0.0, 0.8, -1.5}) {
    for (double ls : {-0.7, 0.3}) {
      int n = 20000;
      double acc = 0.0;
      double w = (hi - lo) / n;
      for (int i = 0; i < n; ++i) {
        double a = lo + (i + 0.5) * w;
        acc += std::exp(squashed_logprob(a, mean, ls, lo, hi)) * w;
      }
      REQUIRE(acc == Catch::Approx(1.0).margin(1e-3));
    }
  }
}

TEST_CASE("logprob from z and from action agree") {
  Rng rng(4);
  for (int trial = 0; trial < 200; ++trial) {
    double lo = -60.0, hi = 120.0;
    double mean = rng.uniform(-2.0, 2.0);
    double ls = rng.uniform(-3.0, 1.0);
    PowerSample s = squashed_sample(mean, ls, lo, hi, rng);
    double via_action = squashed_logprob(s.action, mean, ls, lo, hi);
    REQUIRE(via_action == Catch::Approx(s.log_prob).margin(1e-6));
  }
}

TEST_CASE("enumeration head softmax probabilities") {
  SECTION("equal logits are uniform") {
    auto p = softmax({0.3, 0.3, 0.3});
    for (double v : p) REQUIRE(v == Catch::Approx(1.0 / 3).margin(1e-15));
  }
  SECTION("logits (0, ln 2) give (1/3, 2/3)") {
    auto p = softmax({0.0, std::log(2.0)});
    REQUIRE(p[0] == Catch::Approx(1.0 / 3).margin(1e-12));
    REQUIRE(p[1] == Catch::Approx(2.0 / 3).margin(1e-12));
  }
}

TEST_CASE("enumeration sampling matches exhaustive likelihoods") {
  Rng rng(5);
  Mlp scorer = Mlp::make({4 + 3, 16, 1}, rng, 1.0);
  ad::Vec genc(4);
  genc << 0.2, -0.4, 0.9, 0.1;
  std::vector<uint8_t> lay = {1, 1, 1};
  auto support = option_space(lay, 2);
  auto probs = softmax(enum_option_logits(scorer, genc, support));

  std::map<int, int> counts;
  int n = 200000;
  for (int i = 0; i < n; ++i) ++counts[sample_categorical(probs, rng)];
  for (size_t k = 0; k < support.size(); ++k) {
    double freq = static_cast<double>(counts[static_cast<int>(k)]) / n;
    REQUIRE(freq == Catch::Approx(probs[k]).margin(0.01));
  }
}

TEST_CASE("sequential head single-step case") {
  // N=1, 2 laying EBs, all logits equal including STOP -> P(pick EB0) = 1/3
  Rng rng(6);
  Mlp net = Mlp::make({4 + 2, 8, 3}, rng, 1.0);
  for (auto& l : net.layers) {
    l.w.setZero();
    l.b.setZero();
  }
  ad::Vec genc(4);
  genc.setZero();
  std::vector<uint8_t> lay = {1, 1};
  Allocation pick_eb0;
  pick_eb0.bits = {1, 0};
  double lp = seq_marginal_logprob(net, genc, lay, 1, pick_eb0);
  REQUIRE(lp == Catch::Approx(std::log(1.0 / 3)).margin(1e-12));
}

TEST_CASE("sequential marginal equals full pick-sequence enumeration") {
  // 3 laying EBs, N=2: enumerate every pick sequence by brute force and
  // compare against the subset-DP marginal.
  Rng rng(7);
  int m_count = 3;
  Mlp net = Mlp::make({5 + m_count, 12, m_count + 1}, rng, 1.0);
  ad::Vec genc(5);
  for (int i = 0; i < 5; ++i) genc[i] = rng.normal();
  std::vector<uint8_t> lay = {1, 1, 1};
  int n_chargers = 2;

  std::map<std::vector<uint8_t>, double> alloc_prob;
  std::function<void(std::vector<uint8_t>, int, double)> walk =
      [&](std::vector<uint8_t> picked, int picks, double prob) {
        int candidates = 0;
        for (int m = 0; m < m_count; ++m)
          if (lay[m] && !picked[m]) ++candidates;
        if (picks == n_chargers || candidates == 0) {
          alloc_prob[picked] += prob;
          return;
        }
        auto p = ebcsl::detail::seq_step_probs(net, genc, lay, picked);
        alloc_prob[picked] += prob * p[m_count];  // STOP here
        for (int m = 0; m < m_count; ++m) {
          if (!lay[m] || picked[m]) continue;
          auto nxt = picked;
          nxt[m] = 1;
          walk(nxt, picks + 1, prob * p[m]);
        }
      };
  walk(std::vector<uint8_t>(m_count, 0), 0, 1.0);

  double total = 0.0;
  for (const auto& [bits, prob] : alloc_prob) {
    Allocation a;
    a.bits = bits;
    double lp = seq_marginal_logprob(net, genc, lay, n_chargers, a);
    REQUIRE(std::exp(lp) == Catch::Approx(prob).margin(1e-12));
    total += prob;
  }
  REQUIRE(total == Catch::Approx(1.0).margin(1e-12));
}

TEST_CASE("sequential samples are feasible and match their reported likelihood") {
  Rng rng(8);
  int m_count = 4;
  Mlp net = Mlp::make({3 + m_count, 12, m_count + 1}, rng, 1.0);
  for (int trial = 0; trial < 500; ++trial) {
    ad::Vec genc(3);
    for (int i = 0; i < 3; ++i) genc[i] = rng.normal();
    std::vector<uint8_t> lay(m_count);
    for (auto& b : lay) b = rng.uniform() < 0.6 ? 1 : 0;
    int n_chargers = rng.uniform_int(1, 3);
    AllocationSample s = seq_sample(net, genc, lay, n_chargers, rng);
    REQUIRE(s.alloc.count() <= n_chargers);
    for (int m = 0; m < m_count; ++m)
      if (s.alloc.bits[m]) REQUIRE(lay[m] == 1);
    double lp = seq_marginal_logprob(net, genc, lay, n_chargers, s.alloc);
    REQUIRE(lp == Catch::Approx(s.log_prob).margin(1e-12));
  }
}

TEST_CASE("enumeration head never emits infeasible allocations") {
  Rng rng(9);
  for (int trial = 0; trial < 300; ++trial) {
    int m_count = rng.uniform_int(2, 6);
    Mlp scorer = Mlp::make({2 + m_count, 8, 1}, rng, 1.0);
    ad::Vec genc(2);
    genc << rng.normal(), rng.normal();
    std::vector<uint8_t> lay(m_count);
    for (auto& b : lay) b = rng.uniform() < 0.5 ? 1 : 0;
    int n_chargers = rng.uniform_int(1, m_count);
    auto support = option_space(lay, n_chargers);
    auto probs = softmax(enum_option_logits(scorer, genc, support));
    int idx = sample_categorical(probs, rng);
    const Allocation& a = support[idx];
    REQUIRE(a.count() <= n_chargers);
    for (int m = 0; m < m_count; ++m)
      if (a.bits[m]) REQUIRE(lay[m] == 1);
  }
}

TEST_CASE("squashed logprob node gradients match finite differences") {
  Rng rng(10);
  Mlp net = Mlp::make({4, 8, 1}, rng, 1.0);
  ad::ParamVec log_std(1);
  log_std.v[0] = -0.5;
  ad::Vec x(4);
  for (int i = 0; i < 4; ++i) x[i] = rng.normal();
  double z = 0.7, lo = -30.0, hi = 120.0;

  auto loss_fn = [&]() {
    double mean = net.forward(x)[0];
    return squashed_logprob_from_z(z, mean, log_std.v[0], lo, hi);
  };

  net.zero_grad();
  log_std.zero_grad();
  ad::Tape tape;
  int mean = net.forward(tape, tape.input(x));
  int lp = squashed_logprob_node(tape, mean, tape.param(log_std), z, lo, hi);
  tape.backward(lp);
  REQUIRE(tape.scalar_value(lp) == Catch::Approx(loss_fn()).margin(1e-12));

  ad::Vec analytic = net.grads_flat();
  for (int coord = 0; coord < net.num_params(); coord += 5) {
    ad::Vec p = net.params_flat();
    ad::Vec pp = p;
    double eps = 1e-5;
    pp[coord] += eps;
    net.set_params_flat(pp);
    double up = loss_fn();
    pp[coord] = p[coord] - eps;
    net.set_params_flat(pp);
    double down = loss_fn();
    net.set_params_flat(p);
    double fd = (up - down) / (2 * eps);
    REQUIRE(std::fabs(analytic[coord] - fd) /
                std::max({1e-3, std::fabs(fd), std::fabs(analytic[coord])}) <=
            1e-4);
  }

  // log_std gradient
  double eps = 1e-6;
  double saved = log_std.v[0];
  log_std.v[0] = saved + eps;
  double up = loss_fn();
  log_std.v[0] = saved - eps;
  double down = loss_fn();
  log_std.v[0] = saved;
  REQUIRE(std::fabs(log_std.g[0] - (up - down) / (2 * eps)) < 1e-4);
}
