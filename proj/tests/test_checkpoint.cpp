#include <catch2/catch_amalgamated.hpp>

#include <cstdio>

#include "ebcsl/nets.hpp"
#include "ebcsl/policy.hpp"
#include "scenarios.hpp"

using namespace ebcsl;

TEST_CASE("mlp checkpoint round-trips bit-exactly") {
  Rng rng(11);
  Mlp net = Mlp::make({7, 32, 32, 2}, rng, 0.01);
  // salt parameters with awkward values
  net.layers[0].w(0, 0) = -0.0;
  net.layers[0].w(1, 1) = 1e-308;
  net.layers[1].b[3] = std::nextafter(1.0, 2.0);
  std::string path = "/tmp/ebcsl_ckpt.bin";
  save_mlp(path, net);
  Mlp back = load_mlp(path);
  REQUIRE(back.layer_sizes == net.layer_sizes);
  ad::Vec a = net.params_flat();
  ad::Vec b = back.params_flat();
  REQUIRE(a.size() == b.size());
  for (int i = 0; i < a.size(); ++i) {
    uint64_t ua, ub;
    std::memcpy(&ua, &a[i], 8);
    std::memcpy(&ub, &b[i], 8);
    REQUIRE(ua == ub);
  }
  std::remove(path.c_str());
}

TEST_CASE("bad magic and truncation are rejected") {
  std::string path = "/tmp/ebcsl_bad.bin";
  {
    std::ofstream os(path, std::ios::binary);
    os << "nonsense";
  }
  REQUIRE_THROWS_AS(load_mlp(path), ParseError);
  std::remove(path.c_str());
}

TEST_CASE("policy bundle checkpoint round-trips with multipliers") {
  ScenarioConfig cfg = testing::micro_scenario(1);
  PolicySizes sizes;
  sizes.high_actor = {16, 16};
  sizes.termination = {8};
  sizes.low_actor = {16};
  sizes.critic = {16, 16};
  PolicyBundle b = PolicyBundle::make(cfg, sizes, 5);
  std::string path = "/tmp/ebcsl_bundle.bin";
  save_bundle(path, b, 1.25, 0.75);
  double lh = 0.0, ll = 0.0;
  PolicyBundle back = load_bundle(path, &lh, &ll);
  REQUIRE(lh == 1.25);
  REQUIRE(ll == 0.75);
  REQUIRE((back.mu_scorer.params_flat() - b.mu_scorer.params_flat()).norm() == 0.0);
  REQUIRE((back.critic_c.params_flat() - b.critic_c.params_flat()).norm() == 0.0);
  REQUIRE(back.low_log_std.v[0] == b.low_log_std.v[0]);
  // loaded policy produces identical actions
  Rng r1(3), r2(3);
  GlobalState s = reset(cfg, r1);
  GlobalState s2 = reset(cfg, r2);
  Allocation prev = Allocation::zeros(cfg.fleet_size);
  HighDecision d1 = act_high(b, s, cfg, prev, true, r1);
  HighDecision d2 = act_high(back, s2, cfg, prev, true, r2);
  REQUIRE(d1.alloc.bits == d2.alloc.bits);
  REQUIRE(d1.log_prob == d2.log_prob);
  std::remove(path.c_str());
}
