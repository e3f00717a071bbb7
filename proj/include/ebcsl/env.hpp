#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ebcsl/config.hpp"
#include "ebcsl/errors.hpp"
#include "ebcsl/rng.hpp"
#include "ebcsl/travel.hpp"

namespace ebcsl {

struct EbLocalState {
  double energy_kwh = 0.0;  // E, in [0, soc_max * E_bat]
  int status = 1;           // B: 1 layover, 0 operating
  int prev_status = 1;      // B at t-1
  int tau = 0;              // steps to departure (layover) / steps out (operating)
  int prev_alloc = 0;       // omega at t-1
  int trip_index = 0;       // current trip within the rotation
  int trip_wraps = 0;       // rotation wrap count (next-day departures)
};

struct GlobalState {
  std::vector<EbLocalState> locals;
  std::vector<double> pv_history;     // h+1 entries, oldest first; back() = P_t^PV
  std::vector<double> price_history;  // h+1 entries, oldest first; back() = rho_t
  int clock = 0;                      // t
  int day = 0;                        // trace day of this episode

  double price_now() const { return price_history.back(); }
  double pv_now() const { return pv_history.back(); }
};

struct Allocation {
  std::vector<uint8_t> bits;  // length M

  int count() const { return std::accumulate(bits.begin(), bits.end(), 0); }
  bool operator==(const Allocation& o) const { return bits == o.bits; }

  static Allocation zeros(int m) {
    Allocation a;
    a.bits.assign(m, 0);
    return a;
  }
};

struct PowerRange {
  double lo = 0.0;
  double hi = 0.0;
  bool singleton() const { return lo == hi; }
  double clamp(double p) const { return std::min(hi, std::max(lo, p)); }
};

struct CostBreakdown {
  double charging = 0.0;
  std::vector<double> degradation;  // per EB
  std::vector<double> switching;    // per EB
};

struct StepOutcome {
  GlobalState next_state;
  double operational_reward = 0.0;  // r_opr = -(charging + sum deg + sum sw)
  double safety_cost = 0.0;         // kWh shortfall, evaluated on the pre-step state
  CostBreakdown costs;
  double p_buy = 0.0;
  double p_sell = 0.0;
  bool forced_termination = false;  // any EB departed or returned this step
  std::vector<double> powers;       // realized per-EB powers, kW
};

// --- pure cost kernels (shared with the DP oracle) ------------------------

inline std::pair<double, double> grid_split(double total_power_kw, double pv_kw) {
  double net = total_power_kw - pv_kw;
  if (net >= 0.0) return {net, 0.0};
  return {0.0, -net};
}

inline double charging_cost(double price, double p_buy, double p_sell,
                            const ScenarioConfig& cfg) {
  return price * (p_buy - cfg.sell_discount * p_sell) * cfg.dt_hours();
}

inline double degradation_cost(double power_kw, int status, const ScenarioConfig& cfg) {
  return cfg.zeta_battery * std::fabs(cfg.bk_slope / 100.0) *
         std::fabs(power_kw / cfg.battery_kwh) * status;
}

inline double switching_cost(int prev_alloc, int alloc, int status,
                             const ScenarioConfig& cfg) {
  return cfg.zeta_switch * prev_alloc * (1 - alloc) * status;
}

// ---------------------------------------------------------------------------

inline PowerRange feasible_power_range(const EbLocalState& s, int alloc_bit,
                                       const ScenarioConfig& cfg) {
  double dt = cfg.dt_hours();
  PowerRange r;
  if (s.status == 1 && alloc_bit == 1) {
    r.lo = std::max(-cfg.p_discharge_max_kw, (cfg.soc_floor_kwh() - s.energy_kwh) / dt);
    r.hi = std::min(cfg.p_charge_max_kw, (cfg.soc_cap_kwh() - s.energy_kwh) / dt);
    if (r.lo > r.hi) {
      // Required recovery charging exceeds the charger cap; collapse to the
      // nearest feasible bound.
      r.lo = r.hi;
    }
  } else if (s.status == 1) {
    r.lo = r.hi = 0.0;
  } else {
    r.lo = std::max(-cfg.p_discharge_max_kw, -s.energy_kwh / dt);
    r.hi = 0.0;
    if (r.lo > r.hi) r.lo = r.hi;
  }
  return r;
}

inline double safety_cost(const GlobalState& s, const ScenarioConfig& cfg) {
  double floor = cfg.soc_floor_kwh();
  double total = 0.0;
  for (const auto& l : s.locals) total += std::max(0.0, floor - l.energy_kwh);
  return total;
}

// Per-step period termination hazard. Layover terminates deterministically at
// tau = 0; operating terminates with pmf(tau) / prod_{x<tau}(1 - pmf(x)).
inline double termination_prob(const EbLocalState& s, const TravelPmf& pmf) {
  if (s.status == 1) return s.tau == 0 ? 1.0 : 0.0;
  if (s.tau > pmf.max_step()) return 1.0;  // survival mass exhausted
  double numer = pmf.prob(s.tau);
  double denom = 1.0;
  for (int x = 0; x < s.tau; ++x) denom *= 1.0 - pmf.prob(x);
  if (denom <= 1e-300) {
    if (numer > 1e-300)
      throw ContractViolation("termination_prob: pmf support exhausted with nonzero mass");
    return 1.0;
  }
  return std::min(1.0, std::max(0.0, numer / denom));
}

inline bool forced_termination(const GlobalState& prev, const GlobalState& cur) {
  for (size_t m = 0; m < cur.locals.size(); ++m)
    if (prev.locals[m].status + cur.locals[m].status == 1) return true;
  return false;
}

// Same predicate from the stored previous statuses.
inline bool forced_termination(const GlobalState& cur) {
  for (const auto& l : cur.locals)
    if (l.prev_status + l.status == 1) return true;
  return false;
}

inline CostBreakdown operational_cost(const GlobalState& s, const Allocation& alloc,
                                      const std::vector<double>& powers,
                                      double p_buy, double p_sell,
                                      const ScenarioConfig& cfg) {
  CostBreakdown c;
  c.charging = charging_cost(s.price_now(), p_buy, p_sell, cfg);
  c.degradation.resize(s.locals.size());
  c.switching.resize(s.locals.size());
  for (size_t m = 0; m < s.locals.size(); ++m) {
    c.degradation[m] = degradation_cost(powers[m], s.locals[m].status, cfg);
    c.switching[m] =
        switching_cost(s.locals[m].prev_alloc, alloc.bits[m], s.locals[m].status, cfg);
  }
  return c;
}

inline void validate_allocation(const GlobalState& s, const Allocation& alloc,
                                const ScenarioConfig& cfg) {
  if (static_cast<int>(alloc.bits.size()) != cfg.fleet_size)
    throw ContractViolation("allocation size mismatch");
  if (alloc.count() > cfg.charger_count)
    throw ContractViolation("allocation exceeds charger count");
  for (size_t m = 0; m < alloc.bits.size(); ++m)
    if (alloc.bits[m] == 1 && s.locals[m].status != 1)
      throw ContractViolation("allocation assigns a charger to an operating EB");
}

inline GlobalState reset(const ScenarioConfig& cfg, Rng& rng) {
  GlobalState s;
  int m_count = cfg.fleet_size;
  int h = cfg.timebase.history_window;
  s.clock = 0;
  s.day = cfg.price.days() > 1 ? rng.uniform_int(0, cfg.price.days() - 1) : 0;
  s.locals.resize(m_count);
  for (int m = 0; m < m_count; ++m) {
    auto& l = s.locals[m];
    l.energy_kwh =
        rng.uniform(cfg.initial_soc_range[0], cfg.initial_soc_range[1]) * cfg.battery_kwh;
    l.status = 1;
    l.prev_status = 1;
    l.prev_alloc = 0;  // omega_{-1} = 0
    l.trip_index = 0;
    l.trip_wraps = 0;
    l.tau = cfg.timetable.trip(m, 0).departure_step - 1;  // T_d - t - 1 at t=0
  }
  s.pv_history.resize(h + 1);
  s.price_history.resize(h + 1);
  for (int j = 0; j <= h; ++j) {
    int step = -h + j;  // wraps within the day for negative offsets
    s.pv_history[j] = cfg.pv.at(s.day, step);
    s.price_history[j] = cfg.price.at(s.day, step);
  }
  return s;
}

// One CMDP step. `controlled_powers` must hold a feasible power for every
// allocated EB (entries of non-allocated EBs are ignored); waiting EBs get 0
// and operating EBs draw their drain from the environment.
inline StepOutcome step(const GlobalState& s, const Allocation& alloc,
                        const std::vector<double>& controlled_powers, Rng& rng,
                        const ScenarioConfig& cfg) {
  validate_allocation(s, alloc, cfg);
  int m_count = cfg.fleet_size;
  int t = s.clock;
  int steps_per_day = cfg.steps();
  double dt = cfg.dt_hours();

  StepOutcome out;
  out.powers.assign(m_count, 0.0);
  for (int m = 0; m < m_count; ++m) {
    const auto& l = s.locals[m];
    PowerRange range = feasible_power_range(l, alloc.bits[m], cfg);
    if (alloc.bits[m] == 1) {
      if (static_cast<int>(controlled_powers.size()) != m_count)
        throw ContractViolation("controlled_powers must have one slot per EB");
      double p = controlled_powers[m];
      if (p < range.lo - 1e-9 || p > range.hi + 1e-9)
        throw ContractViolation("controlled power outside the feasible range");
      out.powers[m] = range.clamp(p);
    } else if (l.status == 1) {
      out.powers[m] = 0.0;
    } else {
      double drain = rng.uniform(cfg.consumption_band_kw[0], cfg.consumption_band_kw[1]);
      out.powers[m] = range.clamp(-drain);
    }
  }

  double total_power = std::accumulate(out.powers.begin(), out.powers.end(), 0.0);
  auto [p_buy, p_sell] = grid_split(total_power, s.pv_now());
  out.p_buy = p_buy;
  out.p_sell = p_sell;

  out.costs = operational_cost(s, alloc, out.powers, p_buy, p_sell, cfg);
  double cost_sum = out.costs.charging;
  for (double d : out.costs.degradation) cost_sum += d;
  for (double d : out.costs.switching) cost_sum += d;
  out.operational_reward = -cost_sum;
  out.safety_cost = safety_cost(s, cfg);

  GlobalState next = s;
  next.clock = t + 1;
  for (int m = 0; m < m_count; ++m) {
    auto& l = next.locals[m];
    const auto& prev = s.locals[m];

    double e = prev.energy_kwh + out.powers[m] * dt;
    l.energy_kwh = std::min(cfg.soc_cap_kwh(), std::max(0.0, e));
    l.prev_status = prev.status;
    l.prev_alloc = alloc.bits[m];

    bool flips;
    if (prev.status == 1) {
      flips = prev.tau == 0;
    } else {
      const TripSpec& trip = cfg.timetable.trip(m, prev.trip_index);
      TravelPmf pmf = travel_pmf(cfg.travel, trip.departure_step, cfg.timebase);
      double prob = termination_prob(prev, pmf);
      flips = prob >= 1.0 || rng.uniform() < prob;
    }

    if (prev.status == 1 && !flips) {
      l.status = 1;
      l.tau = prev.tau - 1;
    } else if (prev.status == 1 && flips) {
      l.status = 0;  // departs; tau counts steps since departure
      l.tau = prev.tau + 1;
    } else if (!flips) {
      l.status = 0;
      l.tau = prev.tau + 1;
    } else {
      // Returns to the terminal; the next trip in the rotation is assigned.
      l.status = 1;
      int next_index = cfg.timetable.next_index(m, prev.trip_index);
      l.trip_index = next_index;
      l.trip_wraps = prev.trip_wraps + (next_index == 0 ? 1 : 0);
      int dep = cfg.timetable.trip(m, next_index).departure_step +
                l.trip_wraps * steps_per_day;
      l.tau = std::max(0, dep - (t + 1) - 1);  // late return departs next step
    }
  }

  int h = cfg.timebase.history_window;
  for (int j = 0; j < h; ++j) {
    next.pv_history[j] = s.pv_history[j + 1];
    next.price_history[j] = s.price_history[j + 1];
  }
  next.pv_history[h] = cfg.pv.at(s.day, t + 1);
  next.price_history[h] = cfg.price.at(s.day, t + 1);

  out.forced_termination = forced_termination(s, next);
  out.next_state = std::move(next);
  return out;
}

// --- state encodings -------------------------------------------------------

inline int global_encoding_dim(const ScenarioConfig& cfg) {
  return 5 * cfg.fleet_size + 2 * (cfg.timebase.history_window + 1) + 1;
}

inline int local_encoding_dim(const ScenarioConfig& cfg) {
  return 5 + 2 * (cfg.timebase.history_window + 1) + 1 + 2 * cfg.fleet_size;
}

inline Eigen::VectorXd encode_global(const GlobalState& s, const ScenarioConfig& cfg) {
  int m_count = cfg.fleet_size;
  int h = cfg.timebase.history_window;
  double t_cap = cfg.steps();
  Eigen::VectorXd x(global_encoding_dim(cfg));
  int i = 0;
  for (int m = 0; m < m_count; ++m) {
    const auto& l = s.locals[m];
    x[i++] = l.energy_kwh / cfg.battery_kwh;
    x[i++] = l.status;
    x[i++] = l.prev_status;
    x[i++] = l.tau / t_cap;
    x[i++] = l.prev_alloc;
  }
  for (int j = 0; j <= h; ++j) x[i++] = s.pv_history[j] / cfg.pv_scale;
  for (int j = 0; j <= h; ++j) x[i++] = s.price_history[j] / cfg.price_scale;
  x[i++] = s.clock / t_cap;
  return x;
}

inline Eigen::VectorXd encode_local(const GlobalState& s, int m, const Allocation& alloc,
                                    const ScenarioConfig& cfg) {
  int h = cfg.timebase.history_window;
  double t_cap = cfg.steps();
  Eigen::VectorXd x(local_encoding_dim(cfg));
  int i = 0;
  const auto& l = s.locals[m];
  x[i++] = l.energy_kwh / cfg.battery_kwh;
  x[i++] = l.status;
  x[i++] = l.prev_status;
  x[i++] = l.tau / t_cap;
  x[i++] = l.prev_alloc;
  for (int j = 0; j <= h; ++j) x[i++] = s.pv_history[j] / cfg.pv_scale;
  for (int j = 0; j <= h; ++j) x[i++] = s.price_history[j] / cfg.price_scale;
  x[i++] = s.clock / t_cap;
  for (int k = 0; k < cfg.fleet_size; ++k) x[i++] = alloc.bits[k];
  for (int k = 0; k < cfg.fleet_size; ++k) x[i++] = k == m ? 1.0 : 0.0;
  return x;
}

// --- episode trace dump -----------------------------------------------------

inline void trace_header(std::ostream& os) {
  os << "t,m,E,B,tau,omega,p,price,pv,P_buy,P_sell,c_ch,c_bat,c_sw,c_safe\n";
}

inline void trace_rows(std::ostream& os, const GlobalState& s, const Allocation& alloc,
                       const StepOutcome& out) {
  os.precision(17);
  for (size_t m = 0; m < s.locals.size(); ++m) {
    const auto& l = s.locals[m];
    os << s.clock << ',' << m << ',' << l.energy_kwh << ',' << l.status << ','
       << l.tau << ',' << static_cast<int>(alloc.bits[m]) << ',' << out.powers[m]
       << ',' << s.price_now() << ',' << s.pv_now() << ',' << out.p_buy << ','
       << out.p_sell << ',' << out.costs.charging << ',' << out.costs.degradation[m]
       << ',' << out.costs.switching[m] << ',' << out.safety_cost << '\n';
  }
}

}  // namespace ebcsl
