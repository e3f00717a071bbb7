#pragma once

#include <cmath>
#include <utility>
#include <vector>

#include "ebcsl/errors.hpp"
#include "ebcsl/rng.hpp"
#include "ebcsl/timebase.hpp"

namespace ebcsl {

struct StepRange {
  int begin = 0;  // inclusive
  int end = 0;    // exclusive
  bool contains(int s) const { return s >= begin && s < end; }
};

// Trip duration is normal in minutes with peak/off-peak parameters selected
// by the departure step, discretized to whole steps.
struct TravelTimeModel {
  double peak_mean_min = 50.0;
  double peak_sd_min = 8.0;
  double offpeak_mean_min = 40.0;
  double offpeak_sd_min = 8.0;
  std::vector<StepRange> peak_windows;
  int min_steps = 1;
  int max_steps = 12;

  bool is_peak(int departure_step) const {
    for (const auto& w : peak_windows)
      if (w.contains(departure_step)) return true;
    return false;
  }

  void validate() const {
    if (min_steps < 1) throw ConfigError("travel: min_steps must be >= 1");
    if (max_steps < min_steps) throw ConfigError("travel: max_steps < min_steps");
    if (peak_sd_min < 0 || offpeak_sd_min < 0)
      throw ConfigError("travel: negative standard deviation");
  }
};

struct TravelPmf {
  int min_step = 1;
  std::vector<double> probs;  // probs[k - min_step] = Pr(T_o = k steps)

  int max_step() const { return min_step + static_cast<int>(probs.size()) - 1; }

  double prob(int steps) const {
    if (steps < min_step || steps > max_step()) return 0.0;
    return probs[steps - min_step];
  }

  double mass() const {
    double s = 0.0;
    for (double p : probs) s += p;
    return s;
  }
};

inline double normal_cdf(double x, double mean, double sd) {
  return 0.5 * std::erfc(-(x - mean) / (sd * std::numbers::sqrt2));
}

// Bins the duration normal into steps: step k collects the mass of
// ((k-1/2)*dt, (k+1/2)*dt] minutes, truncated to [min_steps, max_steps] and
// renormalized. A zero-sd model collapses to a point mass.
inline TravelPmf travel_pmf(const TravelTimeModel& model, int departure_step,
                            const Timebase& tb) {
  model.validate();
  bool peak = model.is_peak(departure_step);
  double mean = peak ? model.peak_mean_min : model.offpeak_mean_min;
  double sd = peak ? model.peak_sd_min : model.offpeak_sd_min;
  double dt = tb.step_minutes;

  TravelPmf pmf;
  pmf.min_step = model.min_steps;
  pmf.probs.assign(model.max_steps - model.min_steps + 1, 0.0);

  if (sd == 0.0) {
    int k = static_cast<int>(std::ceil(mean / dt - 0.5));
    k = std::max(model.min_steps, std::min(model.max_steps, k));
    pmf.probs[k - model.min_steps] = 1.0;
    return pmf;
  }

  for (int k = model.min_steps; k <= model.max_steps; ++k) {
    double lo = (k - 0.5) * dt;
    double hi = (k + 0.5) * dt;
    pmf.probs[k - model.min_steps] = normal_cdf(hi, mean, sd) - normal_cdf(lo, mean, sd);
  }
  double total = pmf.mass();
  if (total <= 1e-300)
    throw ConfigError("travel: empty pmf support after truncation");
  for (double& p : pmf.probs) p /= total;
  return pmf;
}

inline int sample_travel_steps(const TravelPmf& pmf, Rng& rng) {
  double u = rng.uniform();
  double acc = 0.0;
  for (size_t i = 0; i < pmf.probs.size(); ++i) {
    acc += pmf.probs[i];
    if (u < acc) return pmf.min_step + static_cast<int>(i);
  }
  return pmf.max_step();
}

inline int sample_travel_steps(const TravelTimeModel& model, int departure_step,
                               const Timebase& tb, Rng& rng) {
  return sample_travel_steps(travel_pmf(model, departure_step, tb), rng);
}

}  // namespace ebcsl
