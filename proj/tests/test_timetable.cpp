#include <catch2/catch_amalgamated.hpp>

#include "ebcsl/timetable.hpp"

using namespace ebcsl;

TEST_CASE("explicit rotations pass through") {
  std::vector<std::vector<TripSpec>> rot(2);
  rot[0] = {{0, 0, 12}, {1, 0, 60}};
  rot[1] = {{2, 1, 18}, {3, 1, 66}};
  Timetable tt = build_timetable(rot, 144);
  REQUIRE(tt.fleet_size() == 2);
  REQUIRE(tt.trip(0, 0).departure_step == 12);
  REQUIRE(tt.trip(1, 1).departure_step == 66);
  REQUIRE(tt.next_index(0, 0) == 1);
  REQUIRE(tt.next_index(0, 1) == 0);  // wraps to the next day
}

TEST_CASE("duplicate departures are rejected") {
  std::vector<std::vector<TripSpec>> rot(1);
  rot[0] = {{0, 0, 30}, {1, 0, 30}};
  REQUIRE_THROWS_AS(build_timetable(rot, 144), ConfigError);
}

TEST_CASE("decreasing departures are rejected") {
  std::vector<std::vector<TripSpec>> rot(1);
  rot[0] = {{0, 0, 30}, {1, 0, 20}};
  REQUIRE_THROWS_AS(build_timetable(rot, 144), ConfigError);
}

TEST_CASE("every EB needs at least one trip") {
  std::vector<std::vector<TripSpec>> rot(2);
  rot[0] = {{0, 0, 30}};
  REQUIRE_THROWS_AS(build_timetable(rot, 144), ConfigError);
}

TEST_CASE("first departure at step 0 is rejected") {
  std::vector<std::vector<TripSpec>> rot(1);
  rot[0] = {{0, 0, 0}};
  REQUIRE_THROWS_AS(build_timetable(rot, 144), ConfigError);
}

TEST_CASE("headway generator spaces departures arithmetically") {
  Timetable tt = generate_headway_timetable(3, 10, 6, 2, 30, 144);
  // EB m trip j departs at 10 + 6m + 30j
  for (int m = 0; m < 3; ++m)
    for (int j = 0; j < 2; ++j)
      REQUIRE(tt.trip(m, j).departure_step == 10 + 6 * m + 30 * j);
  // consecutive EBs are offset by exactly the headway
  for (int m = 0; m + 1 < 3; ++m)
    REQUIRE(tt.trip(m + 1, 0).departure_step - tt.trip(m, 0).departure_step == 6);
  // two opposing routes alternate
  REQUIRE(tt.trip(0, 0).route_id != tt.trip(0, 1).route_id);
}
