#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "ebcsl/env.hpp"
#include "ebcsl/options.hpp"

namespace ebcsl {

struct OracleConfig {
  std::vector<double> power_levels = {-120.0, -60.0, 0.0, 60.0, 120.0};
  int energy_bins = 241;
  int horizon = -1;  // defaults to one day
  long max_table = 10'000'000;
};

struct OracleSchedule {
  std::vector<Allocation> alloc;            // per step
  std::vector<std::vector<double>> power;   // per step, per EB
};

struct OracleResult {
  bool feasible = false;
  std::string message;
  double optimal_return = 0.0;
  OracleSchedule schedule;
  double slack_per_step = 0.0;  // one power-quantum reward bound
};

// Collapses the stochastic pieces so the instance is solvable with perfect
// information: point-mass travel, midpoint drain, midpoint initial SoC.
inline ScenarioConfig deterministic_analog(const ScenarioConfig& cfg) {
  ScenarioConfig out = cfg;
  out.travel.peak_sd_min = 0.0;
  out.travel.offpeak_sd_min = 0.0;
  double mid = 0.5 * (cfg.consumption_band_kw[0] + cfg.consumption_band_kw[1]);
  out.consumption_band_kw = {mid, mid};
  double soc = 0.5 * (cfg.initial_soc_range[0] + cfg.initial_soc_range[1]);
  out.initial_soc_range = {soc, soc};
  return out;
}

namespace detail {

struct DeterministicPattern {
  // statuses[m][t], taus[m][t], trip_dep[m][t] (departure step of the trip
  // assigned at t, needed to pick the travel pmf)
  std::vector<std::vector<int>> status, tau, trip_dep;
};

// Replays the status bookkeeping of env::step with hazard == {0, 1} only.
inline DeterministicPattern deterministic_pattern(const ScenarioConfig& cfg, int horizon) {
  DeterministicPattern p;
  int m_count = cfg.fleet_size;
  p.status.assign(m_count, std::vector<int>(horizon, 1));
  p.tau.assign(m_count, std::vector<int>(horizon, 0));
  p.trip_dep.assign(m_count, std::vector<int>(horizon, 0));
  for (int m = 0; m < m_count; ++m) {
    int status = 1;
    int tau = cfg.timetable.trip(m, 0).departure_step - 1;
    int trip_index = 0;
    int wraps = 0;
    for (int t = 0; t < horizon; ++t) {
      p.status[m][t] = status;
      p.tau[m][t] = tau;
      p.trip_dep[m][t] = cfg.timetable.trip(m, trip_index).departure_step;
      EbLocalState probe;
      probe.status = status;
      probe.tau = tau;
      bool flips;
      if (status == 1) {
        flips = tau == 0;
      } else {
        TravelPmf pmf = travel_pmf(cfg.travel, p.trip_dep[m][t], cfg.timebase);
        double prob = termination_prob(probe, pmf);
        if (prob > 0.0 && prob < 1.0)
          throw ConfigError("dp_oracle: travel times are not deterministic");
        flips = prob >= 1.0;
      }
      if (status == 1 && !flips) {
        --tau;
      } else if (status == 1 && flips) {
        status = 0;
        ++tau;
      } else if (!flips) {
        ++tau;
      } else {
        status = 1;
        int next_index = cfg.timetable.next_index(m, trip_index);
        if (next_index == 0) ++wraps;
        trip_index = next_index;
        int dep = cfg.timetable.trip(m, trip_index).departure_step + wraps * cfg.steps();
        tau = std::max(0, dep - (t + 1) - 1);
      }
    }
  }
  return p;
}

}  // namespace detail

// Exact backward induction over discretized per-EB energy and enumerated
// feasible allocations, maximizing the cumulative operational reward subject
// to E >= eta_min * E_bat at every step (hard floor). Requires a
// deterministic instance; see deterministic_analog().
inline OracleResult dp_oracle(const ScenarioConfig& cfg, const OracleConfig& ocfg) {
  OracleResult res;
  if (cfg.consumption_band_kw[0] != cfg.consumption_band_kw[1])
    throw ConfigError("dp_oracle: consumption band must be degenerate");
  if (cfg.initial_soc_range[0] != cfg.initial_soc_range[1])
    throw ConfigError("dp_oracle: initial SoC must be fixed");
  if (ocfg.energy_bins < 2) throw ConfigError("dp_oracle: need at least 2 energy bins");
  bool has_zero = false;
  for (double p : ocfg.power_levels) {
    if (p == 0.0) has_zero = true;
    if (p < -cfg.p_discharge_max_kw - 1e-9 || p > cfg.p_charge_max_kw + 1e-9)
      throw ConfigError("dp_oracle: power level outside the charger limits");
  }
  if (!has_zero) throw ConfigError("dp_oracle: power levels must include 0");

  int horizon = ocfg.horizon > 0 ? ocfg.horizon : cfg.steps();
  int m_count = cfg.fleet_size;
  int bins = ocfg.energy_bins;
  double cap = cfg.soc_cap_kwh();
  double floor = cfg.soc_floor_kwh();
  double dt = cfg.dt_hours();
  double drain = cfg.consumption_band_kw[0];

  auto pattern = detail::deterministic_pattern(cfg, horizon);

  long states = 1;
  for (int m = 0; m < m_count; ++m) {
    states *= bins;
    if (states > ocfg.max_table) throw ConfigError("dp_oracle: state table too large");
  }
  long prev_states = 1L << m_count;
  long table = states * prev_states;
  if (table > ocfg.max_table || table * horizon > ocfg.max_table)
    throw ConfigError("dp_oracle: state table too large");

  auto bin_energy = [&](int b) { return cap * b / (bins - 1); };
  auto snap = [&](double e) {
    int b = static_cast<int>(std::lround(e / cap * (bins - 1)));
    return std::max(0, std::min(bins - 1, b));
  };

  // per-step feasible option lists and, per option size, power combos
  const double ninf = -std::numeric_limits<double>::infinity();
  std::vector<double> value(table, 0.0), next_value(table, 0.0);
  std::vector<std::vector<long>> best_action(horizon);  // packed action id per state

  // enumerate states as bins-multiindex * prevA
  auto state_index = [&](const std::vector<int>& b, int prev_a) {
    long idx = 0;
    for (int m = 0; m < m_count; ++m) idx = idx * bins + b[m];
    return idx * prev_states + prev_a;
  };

  // terminal stage: feasible iff every EB is at or above the floor
  {
    std::vector<int> b(m_count, 0);
    for (long s = 0; s < states; ++s) {
      long rem = s;
      bool ok = true;
      for (int m = m_count - 1; m >= 0; --m) {
        b[m] = static_cast<int>(rem % bins);
        rem /= bins;
        if (bin_energy(b[m]) < floor - 1e-9) ok = false;
      }
      for (long pa = 0; pa < prev_states; ++pa)
        next_value[s * prev_states + pa] = ok ? 0.0 : ninf;
    }
  }

  for (int t = horizon - 1; t >= 0; --t) {
    double price = cfg.price.at(0, t);
    double pv = cfg.pv.at(0, t);
    std::vector<uint8_t> lay(m_count, 0);
    for (int m = 0; m < m_count; ++m) lay[m] = pattern.status[m][t] == 1 ? 1 : 0;
    auto options = option_space(lay, cfg.charger_count, m_count);

    best_action[t].assign(table, -1);
    std::vector<int> b(m_count, 0);
    std::vector<double> energy(m_count, 0.0), powers(m_count, 0.0);
    std::vector<int> nb(m_count, 0);

    for (long s = 0; s < states; ++s) {
      long rem = s;
      bool state_ok = true;
      for (int m = m_count - 1; m >= 0; --m) {
        b[m] = static_cast<int>(rem % bins);
        rem /= bins;
        energy[m] = bin_energy(b[m]);
        if (energy[m] < floor - 1e-9) state_ok = false;
      }
      for (int prev_a = 0; prev_a < prev_states; ++prev_a) {
        long si = s * prev_states + prev_a;
        if (!state_ok) {
          value[si] = ninf;
          continue;
        }
        double best = ninf;
        double best_abs_p = 0.0;
        long best_id = -1;

        for (size_t oi = 0; oi < options.size(); ++oi) {
          const Allocation& alloc = options[oi];
          // per-EB candidate power sets under this option
          std::vector<std::vector<double>> choices(m_count);
          bool dead = false;
          for (int m = 0; m < m_count; ++m) {
            EbLocalState st;
            st.energy_kwh = energy[m];
            st.status = pattern.status[m][t];
            st.tau = pattern.tau[m][t];
            PowerRange range = feasible_power_range(st, alloc.bits[m], cfg);
            if (st.status == 0) {
              choices[m] = {range.clamp(-drain)};
            } else if (!alloc.bits[m]) {
              choices[m] = {0.0};
            } else {
              for (double lv : ocfg.power_levels)
                if (lv >= range.lo - 1e-9 && lv <= range.hi + 1e-9)
                  choices[m].push_back(range.clamp(lv));
              if (choices[m].empty()) dead = true;
            }
          }
          if (dead) continue;

          std::vector<size_t> pick(m_count, 0);
          int combo_id = 0;
          while (true) {
            double total = 0.0, abs_p = 0.0;
            bool next_ok = true;
            for (int m = 0; m < m_count; ++m) {
              powers[m] = choices[m][pick[m]];
              total += powers[m];
              abs_p += std::fabs(powers[m]);
              double e_next = std::min(cap, std::max(0.0, energy[m] + powers[m] * dt));
              nb[m] = snap(e_next);
              if (bin_energy(nb[m]) < floor - 1e-9) next_ok = false;
            }
            if (next_ok) {
              auto [p_buy, p_sell] = grid_split(total, pv);
              double cost = charging_cost(price, p_buy, p_sell, cfg);
              for (int m = 0; m < m_count; ++m) {
                cost += degradation_cost(powers[m], pattern.status[m][t], cfg);
                cost += switching_cost((prev_a >> m) & 1, alloc.bits[m],
                                       pattern.status[m][t], cfg);
              }
              int next_prev = 0;
              for (int m = 0; m < m_count; ++m)
                if (alloc.bits[m]) next_prev |= 1 << m;
              double v = -cost + next_value[state_index(nb, next_prev)];
              bool better = v > best;
              if (!better && v == best && best_id >= 0) {
                better = abs_p < best_abs_p;
              }
              if (better) {
                best = v;
                best_abs_p = abs_p;
                best_id = static_cast<long>(oi) * 1000000 + combo_id;
              }
            }
            // next power combo
            int m = 0;
            while (m < m_count) {
              if (++pick[m] < choices[m].size()) break;
              pick[m] = 0;
              ++m;
            }
            ++combo_id;
            if (m == m_count) break;
          }
        }
        value[si] = best;
        best_action[t][si] = best_id;
      }
    }
    std::swap(value, next_value);
  }

  // initial state
  double e0 = cfg.initial_soc_range[0] * cfg.battery_kwh;
  std::vector<int> b0(m_count, snap(e0));
  long init = state_index(b0, 0);
  if (!std::isfinite(next_value[init])) {
    res.feasible = false;
    res.message = "infeasible: no schedule keeps every EB above the SoC floor";
    return res;
  }
  res.feasible = true;
  res.optimal_return = next_value[init];

  // slack for dominance checks: reward sensitivity of one power quantum
  std::vector<double> lv = ocfg.power_levels;
  std::sort(lv.begin(), lv.end());
  double quantum = 0.0;
  for (size_t i = 1; i < lv.size(); ++i) quantum = std::max(quantum, lv[i] - lv[i - 1]);
  double max_price = 0.0;
  for (int t = 0; t < horizon; ++t)
    max_price = std::max(max_price, std::fabs(cfg.price.at(0, t)));
  res.slack_per_step =
      quantum * (max_price * dt +
                 cfg.zeta_battery * std::fabs(cfg.bk_slope / 100.0) / cfg.battery_kwh) *
      m_count;

  // forward pass to extract the schedule
  res.schedule.alloc.resize(horizon);
  res.schedule.power.assign(horizon, std::vector<double>(m_count, 0.0));
  std::vector<int> bcur = b0;
  int prev_a = 0;
  for (int t = 0; t < horizon; ++t) {
    std::vector<uint8_t> lay(m_count, 0);
    for (int m = 0; m < m_count; ++m) lay[m] = pattern.status[m][t] == 1 ? 1 : 0;
    auto options = option_space(lay, cfg.charger_count, m_count);
    long id = best_action[t][state_index(bcur, prev_a)];
    if (id < 0) break;  // defensive; unreachable on feasible paths
    const Allocation& alloc = options[id / 1000000];
    long combo = id % 1000000;

    std::vector<std::vector<double>> choices(m_count);
    for (int m = 0; m < m_count; ++m) {
      EbLocalState st;
      st.energy_kwh = bin_energy(bcur[m]);
      st.status = pattern.status[m][t];
      st.tau = pattern.tau[m][t];
      PowerRange range = feasible_power_range(st, alloc.bits[m], cfg);
      if (st.status == 0) {
        choices[m] = {range.clamp(-drain)};
      } else if (!alloc.bits[m]) {
        choices[m] = {0.0};
      } else {
        for (double lvl : ocfg.power_levels)
          if (lvl >= range.lo - 1e-9 && lvl <= range.hi + 1e-9)
            choices[m].push_back(range.clamp(lvl));
      }
    }
    std::vector<size_t> pick(m_count, 0);
    for (long c = 0; c < combo; ++c) {
      int m = 0;
      while (m < m_count) {
        if (++pick[m] < choices[m].size()) break;
        pick[m] = 0;
        ++m;
      }
    }
    res.schedule.alloc[t] = alloc;
    int next_prev = 0;
    for (int m = 0; m < m_count; ++m) {
      double p = choices[m][pick[m]];
      res.schedule.power[t][m] = p;
      double e_next = std::min(cap, std::max(0.0, bin_energy(bcur[m]) + p * dt));
      bcur[m] = snap(e_next);
      if (alloc.bits[m]) next_prev |= 1 << m;
    }
    prev_a = next_prev;
  }
  return res;
}

}  // namespace ebcsl
