#include <catch2/catch_amalgamated.hpp>

#include "ebcsl/evaluate.hpp"
#include "scenarios.hpp"

using namespace ebcsl;
using ebcsl::testing::micro_scenario;

namespace {

PolicySizes tiny_sizes() {
  PolicySizes s;
  s.high_actor = {12, 12};
  s.termination = {8};
  s.low_actor = {12};
  s.critic = {12};
  return s;
}

}  // namespace

TEST_CASE("violation rate counts episodes with any violating step") {
  EvalReport rep;
  rep.records.assign(200, {1.0, false});
  rep.finalize();
  REQUIRE(rep.safety_violation_rate == 0.0);
  rep.records[13].violated = true;  // one violating step in one episode
  rep.finalize();
  REQUIRE(rep.safety_violation_rate == Catch::Approx(1.0 / 200).margin(1e-15));
}

TEST_CASE("4 of 500 episodes give 0.8 percent") {
  EvalReport rep;
  rep.records.assign(500, {0.0, false});
  for (int i = 0; i < 4; ++i) rep.records[i * 100].violated = true;
  rep.finalize();
  REQUIRE(rep.safety_violation_rate == Catch::Approx(0.008).margin(1e-15));
}

TEST_CASE("report averages match the per-episode records") {
  ScenarioConfig cfg = micro_scenario(11);
  PolicyBundle policy = PolicyBundle::make(cfg, tiny_sizes(), 3);
  EvalReport rep = evaluate_policy(policy, cfg, 20, 4);
  REQUIRE(rep.episodes == 20);
  double acc = 0.0;
  int bad = 0;
  for (const auto& r : rep.records) {
    acc += r.operational_return;
    if (r.violated) ++bad;
  }
  REQUIRE(rep.avg_operational_return == Catch::Approx(acc / 20).margin(1e-12));
  REQUIRE(rep.safety_violation_rate ==
          Catch::Approx(static_cast<double>(bad) / 20).margin(1e-12));
}

TEST_CASE("greedy evaluation is deterministic per seed") {
  ScenarioConfig cfg = micro_scenario(12);
  PolicyBundle policy = PolicyBundle::make(cfg, tiny_sizes(), 5);
  EvalReport a = evaluate_policy(policy, cfg, 10, 77);
  EvalReport b = evaluate_policy(policy, cfg, 10, 77);
  for (int i = 0; i < 10; ++i)
    REQUIRE(a.records[i].operational_return == b.records[i].operational_return);
  EvalReport c = evaluate_policy(policy, cfg, 10, 78);
  bool any_diff = false;
  for (int i = 0; i < 10; ++i)
    any_diff |= a.records[i].operational_return != c.records[i].operational_return;
  REQUIRE(any_diff);
}

TEST_CASE("json report shape") {
  EvalReport rep;
  rep.records.assign(3, {-1.5, true});
  rep.finalize();
  auto j = rep.to_json();
  REQUIRE(j["episodes"] == 3);
  REQUIRE(j["records"].size() == 3);
  REQUIRE(j["safety_violation_rate"] == 1.0);
}
