#pragma once

#include <array>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ebcsl/errors.hpp"
#include "ebcsl/timebase.hpp"
#include "ebcsl/timetable.hpp"
#include "ebcsl/travel.hpp"

namespace ebcsl {

constexpr int kConfigSchemaVersion = 1;

// Full experiment description. Immutable after load/validate; shared
// read-only across rollout workers.
struct ScenarioConfig {
  Timebase timebase;
  int fleet_size = 6;    // M
  int charger_count = 3; // N

  double battery_kwh = 240.0;    // E_bat
  double soc_min = 0.2;          // eta_min
  double soc_max = 1.0;          // eta_max
  double p_charge_max_kw = 120.0;
  double p_discharge_max_kw = 120.0;
  double sell_discount = 0.8;    // eta_sell
  double zeta_battery = 0.1;
  double zeta_switch = 0.1;
  double bk_slope = -100.0;      // |bk/100| = 1 by default
  std::array<double, 2> consumption_band_kw = {20.0, 40.0};
  std::array<double, 2> initial_soc_range = {0.5, 0.9};

  PriceTrace price;
  PvTrace pv;
  Timetable timetable;
  TravelTimeModel travel;
  uint64_t seed = 1;

  // Derived normalization scales for state encodings.
  double price_scale = 1.0;
  double pv_scale = 1.0;

  double soc_floor_kwh() const { return soc_min * battery_kwh; }
  double soc_cap_kwh() const { return soc_max * battery_kwh; }
  int steps() const { return timebase.steps_per_day; }
  double dt_hours() const { return timebase.step_hours(); }

  void finalize() {
    price_scale = price.abs_max();
    if (price_scale <= 0.0) price_scale = 1.0;
    pv_scale = pv.abs_max();
    if (pv_scale <= 0.0) pv_scale = 1.0;
  }

  void validate() const {
    timebase.validate();
    travel.validate();
    if (fleet_size <= 0) throw ConfigError("fleet_size must be positive");
    if (charger_count <= 0) throw ConfigError("charger_count must be positive");
    if (charger_count >= fleet_size)
      throw ConfigError("charger_count must be smaller than fleet_size");
    if (!(soc_min >= 0.0 && soc_min < soc_max && soc_max <= 1.0))
      throw ConfigError("require 0 <= soc_min < soc_max <= 1");
    if (battery_kwh <= 0.0) throw ConfigError("battery_kwh must be positive");
    if (p_charge_max_kw <= 0.0 || p_discharge_max_kw <= 0.0)
      throw ConfigError("charger power limits must be positive");
    if (!(sell_discount > 0.0 && sell_discount < 1.0))
      throw ConfigError("sell_discount must be in (0, 1)");
    if (consumption_band_kw[0] < 0.0 || consumption_band_kw[1] < consumption_band_kw[0])
      throw ConfigError("consumption_band_kw must be ordered and non-negative");
    if (initial_soc_range[0] < 0.0 || initial_soc_range[1] < initial_soc_range[0] ||
        initial_soc_range[1] > soc_max)
      throw ConfigError("initial_soc_range must be ordered within [0, soc_max]");
    if (initial_soc_range[0] < soc_min)
      throw ConfigError("initial_soc_range must not start below soc_min");
    if (timetable.fleet_size() != fleet_size)
      throw ConfigError("timetable must cover every EB");
    if (price.values.empty() || pv.values.empty())
      throw ConfigError("price and pv traces must be present");
    if (price.days() != pv.days())
      throw ConfigError("price and pv traces must cover the same number of days");
    for (double v : price.values)
      if (!std::isfinite(v)) throw ConfigError("price trace has non-finite values");
    for (double v : pv.values)
      if (v < 0.0 || !std::isfinite(v)) throw ConfigError("pv trace values must be finite and >= 0");
  }
};

namespace detail {

inline Trace trace_from_json(const nlohmann::json& j, TraceKind kind, const Timebase& tb,
                             uint64_t seed, const std::string& base_dir) {
  if (j.contains("csv")) {
    std::string p = j.at("csv").get<std::string>();
    if (!p.empty() && p[0] != '/' && !base_dir.empty()) p = base_dir + "/" + p;
    return load_trace(p, kind, tb);
  }
  if (j.contains("values")) {
    Trace t;
    t.steps_per_day = tb.steps_per_day;
    t.values = j.at("values").get<std::vector<double>>();
    if (t.values.empty() || t.values.size() % tb.steps_per_day != 0)
      throw ConfigError("inline trace length must be a positive multiple of steps_per_day");
    return t;
  }
  if (j.contains("synthetic")) {
    const auto& s = j.at("synthetic");
    int days = s.value("days", 1);
    double noise = s.value("noise_sd", 0.0);
    if (kind == TraceKind::Price)
      return synthetic_price(tb, days, seed, s.value("base", 0.02),
                             s.value("morning_amp", 0.02), s.value("evening_amp", 0.03),
                             noise);
    return synthetic_pv(tb, days, seed, s.value("peak_kw", 42.92),
                        s.value("sunrise_hour", 7.0), s.value("sunset_hour", 19.0), noise);
  }
  throw ConfigError("trace spec needs one of: csv, values, synthetic");
}

inline std::string dirname_of(const std::string& path) {
  auto pos = path.find_last_of('/');
  return pos == std::string::npos ? std::string() : path.substr(0, pos);
}

}  // namespace detail

inline ScenarioConfig scenario_from_json(const nlohmann::json& j,
                                         const std::string& base_dir = "") {
  if (!j.contains("schema_version"))
    throw ConfigError("config: missing schema_version");
  if (j.at("schema_version").get<int>() != kConfigSchemaVersion)
    throw ConfigError("config: unsupported schema_version");

  ScenarioConfig c;
  const auto& tbj = j.at("timebase");
  c.timebase.steps_per_day = tbj.at("steps_per_day").get<int>();
  c.timebase.step_minutes = tbj.at("step_minutes").get<int>();
  c.timebase.history_window = tbj.value("history_window", 4);
  c.timebase.validate();

  c.fleet_size = j.at("fleet_size").get<int>();
  c.charger_count = j.at("charger_count").get<int>();
  c.battery_kwh = j.value("battery_kwh", 240.0);
  c.soc_min = j.value("soc_min", 0.2);
  c.soc_max = j.value("soc_max", 1.0);
  c.p_charge_max_kw = j.value("p_charge_max_kw", 120.0);
  c.p_discharge_max_kw = j.value("p_discharge_max_kw", 120.0);
  c.sell_discount = j.value("sell_discount", 0.8);
  c.zeta_battery = j.value("zeta_battery", 0.1);
  c.zeta_switch = j.value("zeta_switch", 0.1);
  c.bk_slope = j.value("bk_slope", -100.0);
  if (j.contains("consumption_band_kw")) {
    auto v = j.at("consumption_band_kw").get<std::vector<double>>();
    if (v.size() != 2) throw ConfigError("consumption_band_kw must have 2 entries");
    c.consumption_band_kw = {v[0], v[1]};
  }
  if (j.contains("initial_soc_range")) {
    auto v = j.at("initial_soc_range").get<std::vector<double>>();
    if (v.size() != 2) throw ConfigError("initial_soc_range must have 2 entries");
    c.initial_soc_range = {v[0], v[1]};
  }
  c.seed = j.value("seed", 1);

  c.price = detail::trace_from_json(j.at("price"), TraceKind::Price, c.timebase,
                                    mix_seed(c.seed, 11), base_dir);
  c.pv = detail::trace_from_json(j.at("pv"), TraceKind::Pv, c.timebase,
                                 mix_seed(c.seed, 12), base_dir);

  const auto& tj = j.at("timetable");
  if (tj.contains("explicit")) {
    const auto& e = tj.at("explicit");
    auto deps = e.at("departures").get<std::vector<std::vector<int>>>();
    std::vector<std::vector<int>> routes;
    if (e.contains("routes")) routes = e.at("routes").get<std::vector<std::vector<int>>>();
    std::vector<std::vector<TripSpec>> rot(deps.size());
    int id = 0;
    for (size_t m = 0; m < deps.size(); ++m) {
      for (size_t k = 0; k < deps[m].size(); ++k) {
        TripSpec t;
        t.trip_id = id++;
        t.route_id = (m < routes.size() && k < routes[m].size()) ? routes[m][k] : 0;
        t.departure_step = deps[m][k];
        rot[m].push_back(t);
      }
    }
    c.timetable = build_timetable(std::move(rot), c.timebase.steps_per_day);
  } else if (tj.contains("headway")) {
    const auto& hw = tj.at("headway");
    c.timetable = generate_headway_timetable(
        c.fleet_size, hw.at("first_departure").get<int>(),
        hw.at("headway_steps").get<int>(), hw.at("trips_per_eb").get<int>(),
        hw.at("round_trip_steps").get<int>(), c.timebase.steps_per_day);
  } else {
    throw ConfigError("timetable spec needs one of: explicit, headway");
  }

  if (j.contains("travel")) {
    const auto& tv = j.at("travel");
    c.travel.peak_mean_min = tv.value("peak_mean_min", 50.0);
    c.travel.peak_sd_min = tv.value("peak_sd_min", 8.0);
    c.travel.offpeak_mean_min = tv.value("offpeak_mean_min", 40.0);
    c.travel.offpeak_sd_min = tv.value("offpeak_sd_min", 8.0);
    c.travel.min_steps = tv.value("min_steps", 1);
    c.travel.max_steps = tv.value("max_steps", 12);
    if (tv.contains("peak_windows")) {
      for (const auto& w : tv.at("peak_windows")) {
        StepRange r;
        r.begin = w.at(0).get<int>();
        r.end = w.at(1).get<int>();
        c.travel.peak_windows.push_back(r);
      }
    }
  }

  c.finalize();
  c.validate();
  return c;
}

inline ScenarioConfig load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config file not found: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw ParseError(path + ": " + e.what());
  }
  return scenario_from_json(j, detail::dirname_of(path));
}

// Serialization of the resolved scenario (traces inlined) for run records.
inline nlohmann::json scenario_to_json(const ScenarioConfig& c) {
  nlohmann::json j;
  j["schema_version"] = kConfigSchemaVersion;
  j["timebase"] = {{"steps_per_day", c.timebase.steps_per_day},
                   {"step_minutes", c.timebase.step_minutes},
                   {"history_window", c.timebase.history_window}};
  j["fleet_size"] = c.fleet_size;
  j["charger_count"] = c.charger_count;
  j["battery_kwh"] = c.battery_kwh;
  j["soc_min"] = c.soc_min;
  j["soc_max"] = c.soc_max;
  j["p_charge_max_kw"] = c.p_charge_max_kw;
  j["p_discharge_max_kw"] = c.p_discharge_max_kw;
  j["sell_discount"] = c.sell_discount;
  j["zeta_battery"] = c.zeta_battery;
  j["zeta_switch"] = c.zeta_switch;
  j["bk_slope"] = c.bk_slope;
  j["consumption_band_kw"] = {c.consumption_band_kw[0], c.consumption_band_kw[1]};
  j["initial_soc_range"] = {c.initial_soc_range[0], c.initial_soc_range[1]};
  j["seed"] = c.seed;
  j["price"] = {{"values", c.price.values}};
  j["pv"] = {{"values", c.pv.values}};
  std::vector<std::vector<int>> deps(c.timetable.rotations.size());
  std::vector<std::vector<int>> routes(c.timetable.rotations.size());
  for (size_t m = 0; m < c.timetable.rotations.size(); ++m) {
    for (const auto& t : c.timetable.rotations[m]) {
      deps[m].push_back(t.departure_step);
      routes[m].push_back(t.route_id);
    }
  }
  j["timetable"] = {{"explicit", {{"departures", deps}, {"routes", routes}}}};
  nlohmann::json tw = nlohmann::json::array();
  for (const auto& w : c.travel.peak_windows) tw.push_back({w.begin, w.end});
  j["travel"] = {{"peak_mean_min", c.travel.peak_mean_min},
                 {"peak_sd_min", c.travel.peak_sd_min},
                 {"offpeak_mean_min", c.travel.offpeak_mean_min},
                 {"offpeak_sd_min", c.travel.offpeak_sd_min},
                 {"min_steps", c.travel.min_steps},
                 {"max_steps", c.travel.max_steps},
                 {"peak_windows", tw}};
  return j;
}

}  // namespace ebcsl
