#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "ebcsl/errors.hpp"
#include "ebcsl/rng.hpp"

namespace ebcsl {

constexpr int kMinutesPerDay = 1440;

struct Timebase {
  int steps_per_day = 144;  // T
  int step_minutes = 10;    // dt
  int history_window = 4;   // h; state carries h+1 samples

  double step_hours() const { return step_minutes / 60.0; }

  void validate() const {
    if (steps_per_day <= 0 || step_minutes <= 0)
      throw ConfigError("timebase: steps_per_day and step_minutes must be positive");
    if (steps_per_day * step_minutes != kMinutesPerDay)
      throw ConfigError("timebase: steps_per_day * step_minutes must equal 1440");
    if (history_window < 1)
      throw ConfigError("timebase: history_window must be >= 1");
  }
};

// Per-step series covering whole days; length is a multiple of steps_per_day.
struct Trace {
  std::vector<double> values;
  int steps_per_day = 0;

  int days() const {
    return steps_per_day > 0 ? static_cast<int>(values.size()) / steps_per_day : 0;
  }

  // Wraps both within the day (for history back-fill before step 0) and
  // across the buffer end.
  double at(int day, int step) const {
    int s = ((step % steps_per_day) + steps_per_day) % steps_per_day;
    size_t idx = (static_cast<size_t>(day) * steps_per_day + s) % values.size();
    return values[idx];
  }

  double abs_max() const {
    double m = 0.0;
    for (double v : values) m = std::max(m, std::fabs(v));
    return m;
  }
};

using PriceTrace = Trace;
using PvTrace = Trace;

enum class TraceKind { Price, Pv };

namespace detail {

// Accepts "YYYY-MM-DDTHH:MM[:SS[Z]]"; returns minutes since epoch-of-first-day
// relative ordering only (days are reconstructed from the date fields).
inline bool parse_iso_timestamp(const std::string& s, int64_t* minutes_out) {
  int y = 0, mo = 0, d = 0, h = 0, mi = 0, sec = 0;
  int n = std::sscanf(s.c_str(), "%d-%d-%dT%d:%d:%d", &y, &mo, &d, &h, &mi, &sec);
  if (n < 5) return false;
  if (mo < 1 || mo > 12 || d < 1 || d > 31 || h < 0 || h > 23 || mi < 0 || mi > 59)
    return false;
  // days since 0000-03-01 (civil-from-days algorithm, no time_t involved)
  int yy = y - (mo <= 2 ? 1 : 0);
  int era = (yy >= 0 ? yy : yy - 399) / 400;
  unsigned yoe = static_cast<unsigned>(yy - era * 400);
  unsigned doy = (153u * (mo + (mo > 2 ? -3 : 9)) + 2) / 5 + d - 1;
  unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  int64_t days = static_cast<int64_t>(era) * 146097 + static_cast<int64_t>(doe);
  *minutes_out = days * kMinutesPerDay + h * 60 + mi;
  return true;
}

}  // namespace detail

// Reads a `timestamp,value` CSV, checks it is an equally spaced sampling at
// hourly-or-finer cadence covering whole days, and resamples onto the step
// grid by piecewise-constant hold.
inline Trace load_trace(const std::string& path, TraceKind kind, const Timebase& tb) {
  tb.validate();
  std::ifstream in(path);
  if (!in) throw ConfigError("trace file not found: " + path);

  std::vector<std::pair<int64_t, double>> rows;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line_no == 1 && line.rfind("timestamp", 0) == 0) continue;  // header
    auto comma = line.find(',');
    if (comma == std::string::npos)
      throw ParseError(path + ":" + std::to_string(line_no) + ": expected `timestamp,value`");
    int64_t mins = 0;
    if (!detail::parse_iso_timestamp(line.substr(0, comma), &mins))
      throw ParseError(path + ":" + std::to_string(line_no) + ": bad ISO-8601 timestamp");
    double value = 0.0;
    try {
      size_t used = 0;
      value = std::stod(line.substr(comma + 1), &used);
      std::string rest = line.substr(comma + 1 + used);
      if (rest.find_first_not_of(" \t") != std::string::npos)
        throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw ParseError(path + ":" + std::to_string(line_no) + ": bad numeric value");
    }
    if (!std::isfinite(value))
      throw ParseError(path + ":" + std::to_string(line_no) + ": non-finite value");
    if (kind == TraceKind::Pv && value < 0.0)
      throw ConfigError(path + ":" + std::to_string(line_no) + ": PV power must be >= 0");
    rows.emplace_back(mins, value);
  }
  if (rows.empty()) throw ParseError(path + ": no data rows");

  int64_t origin = rows.front().first;
  if (origin % kMinutesPerDay != 0)
    throw ConfigError(path + ": coverage must start at midnight (00:00)");
  int64_t cadence = rows.size() > 1 ? rows[1].first - rows[0].first : 60;
  if (cadence <= 0 || cadence > 60 || kMinutesPerDay % cadence != 0)
    throw ConfigError(path + ": sample cadence must be hourly or finer and divide the day");
  for (size_t i = 0; i < rows.size(); ++i) {
    int64_t expect = origin + static_cast<int64_t>(i) * cadence;
    if (rows[i].first != expect) {
      throw ConfigError(path + ": missing interval, expected sample at +" +
                        std::to_string(expect - origin) + " min, got +" +
                        std::to_string(rows[i].first - origin) + " min");
    }
  }
  int64_t total_minutes = static_cast<int64_t>(rows.size()) * cadence;
  if (total_minutes % kMinutesPerDay != 0)
    throw ConfigError(path + ": coverage must span whole days");

  Trace out;
  out.steps_per_day = tb.steps_per_day;
  int total_steps = static_cast<int>(total_minutes / tb.step_minutes);
  out.values.resize(total_steps);
  for (int s = 0; s < total_steps; ++s) {
    int64_t minute = static_cast<int64_t>(s) * tb.step_minutes;
    out.values[s] = rows[static_cast<size_t>(minute / cadence)].second;
  }
  return out;
}

// Two-peak daily price curve with seeded noise; stands in for a market feed.
inline PriceTrace synthetic_price(const Timebase& tb, int days, uint64_t seed,
                                  double base = 0.02, double morning_amp = 0.02,
                                  double evening_amp = 0.03, double noise_sd = 0.0) {
  tb.validate();
  Rng rng(mix_seed(seed, 0x707269ULL));
  PriceTrace out;
  out.steps_per_day = tb.steps_per_day;
  out.values.reserve(static_cast<size_t>(days) * tb.steps_per_day);
  for (int d = 0; d < days; ++d) {
    for (int s = 0; s < tb.steps_per_day; ++s) {
      double hour = s * tb.step_minutes / 60.0;
      double v = base;
      v += morning_amp * std::exp(-0.5 * std::pow((hour - 8.0) / 1.5, 2));
      v += evening_amp * std::exp(-0.5 * std::pow((hour - 18.0) / 1.5, 2));
      if (noise_sd > 0.0) v += rng.normal(0.0, noise_sd);
      out.values.push_back(v);
    }
  }
  return out;
}

// Half-sine PV curve between sunrise and sunset, clamped at zero.
inline PvTrace synthetic_pv(const Timebase& tb, int days, uint64_t seed,
                            double peak_kw = 42.92, double sunrise_hour = 7.0,
                            double sunset_hour = 19.0, double noise_sd = 0.0) {
  tb.validate();
  Rng rng(mix_seed(seed, 0x7076ULL));
  PvTrace out;
  out.steps_per_day = tb.steps_per_day;
  out.values.reserve(static_cast<size_t>(days) * tb.steps_per_day);
  for (int d = 0; d < days; ++d) {
    for (int s = 0; s < tb.steps_per_day; ++s) {
      double hour = s * tb.step_minutes / 60.0;
      double v = 0.0;
      if (hour > sunrise_hour && hour < sunset_hour) {
        double x = (hour - sunrise_hour) / (sunset_hour - sunrise_hour);
        v = peak_kw * std::sin(std::numbers::pi * x);
        if (noise_sd > 0.0) v += rng.normal(0.0, noise_sd);
      }
      out.values.push_back(std::max(0.0, v));
    }
  }
  return out;
}

}  // namespace ebcsl
