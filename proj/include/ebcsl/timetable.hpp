#pragma once

#include <string>
#include <vector>

#include "ebcsl/errors.hpp"

namespace ebcsl {

struct TripSpec {
  int trip_id = 0;
  int route_id = 0;
  int departure_step = 0;  // within [1, steps_per_day)
};

// Per-EB ordered trip rotations. Rotations repeat day over day, so the
// next-departure lookup is total: past the last trip it wraps to the first
// trip of the following day.
struct Timetable {
  std::vector<std::vector<TripSpec>> rotations;

  int fleet_size() const { return static_cast<int>(rotations.size()); }

  const TripSpec& trip(int eb, int index) const {
    const auto& r = rotations[eb];
    return r[index % r.size()];
  }

  int next_index(int eb, int index) const {
    return (index + 1) % static_cast<int>(rotations[eb].size());
  }

  // Departure step of trip `index`, offset by +steps_per_day once the
  // rotation has wrapped relative to `current_step`.
  int departure_step(int eb, int index, int current_step, int steps_per_day) const {
    int dep = trip(eb, index).departure_step;
    if (dep <= current_step - steps_per_day) dep += 2 * steps_per_day;  // unreachable guard
    return dep;
  }
};

inline Timetable build_timetable(std::vector<std::vector<TripSpec>> rotations,
                                 int steps_per_day) {
  if (rotations.empty()) throw ConfigError("timetable: no EBs");
  for (size_t m = 0; m < rotations.size(); ++m) {
    const auto& r = rotations[m];
    if (r.empty())
      throw ConfigError("timetable: EB " + std::to_string(m) + " has no trips");
    for (size_t k = 0; k < r.size(); ++k) {
      if (r[k].departure_step < 1 || r[k].departure_step >= steps_per_day)
        throw ConfigError("timetable: EB " + std::to_string(m) + " trip " +
                          std::to_string(k) + " departure out of [1, T)");
      if (k > 0 && r[k].departure_step <= r[k - 1].departure_step)
        throw ConfigError("timetable: EB " + std::to_string(m) +
                          " departures must be strictly increasing");
    }
  }
  Timetable tt;
  tt.rotations = std::move(rotations);
  return tt;
}

// Synthetic rotation on L=2 opposing loops: EBs alternate routes, departures
// spaced by the headway.
inline Timetable generate_headway_timetable(int fleet_size, int first_departure,
                                            int headway_steps, int trips_per_eb,
                                            int round_trip_steps, int steps_per_day) {
  if (fleet_size <= 0 || trips_per_eb <= 0 || headway_steps <= 0)
    throw ConfigError("timetable generator: non-positive parameter");
  std::vector<std::vector<TripSpec>> rotations(fleet_size);
  int trip_id = 0;
  for (int m = 0; m < fleet_size; ++m) {
    for (int j = 0; j < trips_per_eb; ++j) {
      TripSpec t;
      t.trip_id = trip_id++;
      t.route_id = (m + j) % 2;
      t.departure_step = first_departure + m * headway_steps + j * round_trip_steps;
      rotations[m].push_back(t);
    }
  }
  return build_timetable(std::move(rotations), steps_per_day);
}

}  // namespace ebcsl
