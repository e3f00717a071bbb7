#pragma once

#include <array>
#include <vector>

#include "ebcsl/dp_oracle.hpp"
#include "ebcsl/evaluate.hpp"

namespace ebcsl {

// Interval-average price scheme plus per-step PV means and fixed per-trip
// travel estimates, built from a historical day window.
struct ForecastModel {
  // six price intervals in hours: [0,6), [6,9), [9,14), [14,17), [17,21), [21,24)
  static constexpr std::array<double, 7> kPriceBoundariesHours = {0, 6, 9, 14, 17, 21, 24};
  std::vector<double> price_per_step;  // one day
  std::vector<double> pv_per_step;     // one day
};

inline ForecastModel build_forecast(const ScenarioConfig& cfg, int history_days) {
  int t_cap = cfg.steps();
  int days = std::min(history_days, cfg.price.days());
  if (days < 1) throw ConfigError("forecast: need at least one history day");

  ForecastModel f;
  f.pv_per_step.assign(t_cap, 0.0);
  for (int t = 0; t < t_cap; ++t) {
    double acc = 0.0;
    for (int d = 0; d < days; ++d) acc += cfg.pv.at(d, t);
    f.pv_per_step[t] = acc / days;
  }

  f.price_per_step.assign(t_cap, 0.0);
  double steps_per_hour = 60.0 / cfg.timebase.step_minutes;
  for (size_t i = 0; i + 1 < ForecastModel::kPriceBoundariesHours.size(); ++i) {
    int begin = static_cast<int>(ForecastModel::kPriceBoundariesHours[i] * steps_per_hour);
    int end = static_cast<int>(ForecastModel::kPriceBoundariesHours[i + 1] * steps_per_hour);
    end = std::min(end, t_cap);
    if (begin >= end) continue;
    double acc = 0.0;
    int count = 0;
    for (int d = 0; d < days; ++d)
      for (int t = begin; t < end; ++t) {
        acc += cfg.price.at(d, t);
        ++count;
      }
    double avg = acc / count;
    for (int t = begin; t < end; ++t) f.price_per_step[t] = avg;
  }
  return f;
}

// The deterministic planning instance the forecast implies.
inline ScenarioConfig forecast_scenario(const ScenarioConfig& cfg, const ForecastModel& f) {
  ScenarioConfig plan = deterministic_analog(cfg);
  plan.price.values = f.price_per_step;
  plan.price.steps_per_day = cfg.steps();
  plan.pv.values = f.pv_per_step;
  plan.pv.steps_per_day = cfg.steps();
  plan.finalize();
  return plan;
}

struct ForecastBaselineResult {
  OracleResult plan;
  EvalReport report;
};

// Plans once on the forecast with the DP oracle, then executes the schedule
// open loop on stochastic episodes: planned allocations are dropped for EBs
// that are not at the terminal, planned powers are clipped to the realized
// feasible range.
inline ForecastBaselineResult forecast_baseline(const ScenarioConfig& cfg,
                                                const ForecastModel& forecast,
                                                const OracleConfig& ocfg, int episodes,
                                                uint64_t seed) {
  ForecastBaselineResult out;
  ScenarioConfig plan_cfg = forecast_scenario(cfg, forecast);
  out.plan = dp_oracle(plan_cfg, ocfg);
  if (!out.plan.feasible) return out;

  const OracleSchedule& sched = out.plan.schedule;
  int t_cap = cfg.steps();

  out.report.episodes = episodes;
  out.report.records.reserve(episodes);
  for (int e = 0; e < episodes; ++e) {
    Rng rng(mix_seed(seed, 51000 + e));
    GlobalState s = reset(cfg, rng);
    double ret = 0.0;
    bool violated = false;
    for (int t = 0; t < t_cap; ++t) {
      Allocation alloc = Allocation::zeros(cfg.fleet_size);
      std::vector<double> powers(cfg.fleet_size, 0.0);
      if (t < static_cast<int>(sched.alloc.size())) {
        for (int m = 0; m < cfg.fleet_size; ++m) {
          if (!sched.alloc[t].bits.empty() && sched.alloc[t].bits[m] &&
              s.locals[m].status == 1) {
            alloc.bits[m] = 1;
            PowerRange range = feasible_power_range(s.locals[m], 1, cfg);
            powers[m] = range.clamp(sched.power[t][m]);
          }
        }
      }
      StepOutcome res = step(s, alloc, powers, rng, cfg);
      ret += res.operational_reward;
      if (res.safety_cost > 0.0) violated = true;
      s = std::move(res.next_state);
    }
    out.report.records.push_back({ret, violated});
  }
  out.report.finalize();
  return out;
}

}  // namespace ebcsl
