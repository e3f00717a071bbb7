#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <fstream>

#include "ebcsl/timebase.hpp"

using namespace ebcsl;

namespace {

std::string write_temp(const std::string& name, const std::string& content) {
  std::string path = "/tmp/ebcsl_" + name;
  std::ofstream os(path);
  os << content;
  return path;
}

std::string hourly_csv(const std::vector<double>& hours) {
  std::string s = "timestamp,value\n";
  for (size_t h = 0; h < hours.size(); ++h) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "2022-01-%02dT%02d:00:00,%.6f\n",
                  static_cast<int>(1 + h / 24), static_cast<int>(h % 24), hours[h]);
    s += buf;
  }
  return s;
}

}  // namespace

TEST_CASE("timebase invariant") {
  Timebase tb;
  tb.steps_per_day = 144;
  tb.step_minutes = 10;
  REQUIRE_NOTHROW(tb.validate());
  tb.step_minutes = 7;
  REQUIRE_THROWS_AS(tb.validate(), ConfigError);
  tb = Timebase{24, 60, 0};
  REQUIRE_THROWS_AS(tb.validate(), ConfigError);
}

TEST_CASE("hourly price resamples by piecewise-constant hold") {
  std::vector<double> hours(24, 0.02);
  hours[17] = 0.03921;  // evening peak hour
  auto path = write_temp("price.csv", hourly_csv(hours));
  Timebase tb{144, 10, 4};
  Trace t = load_trace(path, TraceKind::Price, tb);
  REQUIRE(t.values.size() == 144);
  for (int s = 102; s <= 107; ++s) REQUIRE(t.values[s] == 0.03921);
  REQUIRE(t.values[101] == 0.02);
  REQUIRE(t.values[108] == 0.02);

  SECTION("every step within an hour equals the hourly input") {
    for (int h = 0; h < 24; ++h)
      for (int s = h * 6; s < (h + 1) * 6; ++s) REQUIRE(t.values[s] == hours[h]);
  }
}

TEST_CASE("constant file holds everywhere") {
  auto path = write_temp("const.csv", hourly_csv(std::vector<double>(24, 0.02)));
  Trace t = load_trace(path, TraceKind::Price, Timebase{144, 10, 4});
  REQUIRE(t.values.size() == 144);
  for (double v : t.values) REQUIRE(v == 0.02);
}

TEST_CASE("pv peak hour holds over its steps") {
  std::vector<double> hours(24, 0.0);
  hours[13] = 42.92;
  auto path = write_temp("pv.csv", hourly_csv(hours));
  Trace t = load_trace(path, TraceKind::Pv, Timebase{144, 10, 4});
  for (int s = 78; s <= 83; ++s) REQUIRE(t.values[s] == 42.92);
}

TEST_CASE("malformed row reports the line number") {
  auto path = write_temp("bad.csv", "timestamp,value\n2022-01-01T00:00:00,1.0\nnot-a-row\n");
  try {
    load_trace(path, TraceKind::Price, Timebase{144, 10, 4});
    FAIL("expected parse error");
  } catch (const ParseError& e) {
    REQUIRE(std::string(e.what()).find(":3") != std::string::npos);
  }
}

TEST_CASE("coverage gap is rejected") {
  std::string s = "timestamp,value\n";
  for (int h = 0; h < 24; ++h) {
    if (h == 5) continue;  // missing hour
    char buf[64];
    std::snprintf(buf, sizeof(buf), "2022-01-01T%02d:00:00,1.0\n", h);
    s += buf;
  }
  auto path = write_temp("gap.csv", s);
  REQUIRE_THROWS_AS(load_trace(path, TraceKind::Price, Timebase{144, 10, 4}), ConfigError);
}

TEST_CASE("negative pv is a domain error") {
  std::vector<double> hours(24, 1.0);
  hours[3] = -0.5;
  auto path = write_temp("negpv.csv", hourly_csv(hours));
  REQUIRE_THROWS_AS(load_trace(path, TraceKind::Pv, Timebase{144, 10, 4}), ConfigError);
  // same values are fine as prices (markets go negative)
  REQUIRE_NOTHROW(load_trace(path, TraceKind::Price, Timebase{144, 10, 4}));
}

TEST_CASE("partial day coverage is rejected") {
  auto path = write_temp("partial.csv", hourly_csv(std::vector<double>(30, 1.0)));
  REQUIRE_THROWS_AS(load_trace(path, TraceKind::Price, Timebase{144, 10, 4}), ConfigError);
}

TEST_CASE("synthetic traces have the right shape") {
  Timebase tb{24, 60, 4};
  auto price = synthetic_price(tb, 3, 42, 0.02, 0.02, 0.03, 0.002);
  auto pv = synthetic_pv(tb, 3, 42, 60.0, 7.0, 19.0, 5.0);
  REQUIRE(price.values.size() == 72);
  REQUIRE(pv.values.size() == 72);
  REQUIRE(pv.days() == 3);
  for (double v : pv.values) REQUIRE(v >= 0.0);
  // seeded: regeneration is identical
  auto price2 = synthetic_price(tb, 3, 42, 0.02, 0.02, 0.03, 0.002);
  REQUIRE(price.values == price2.values);
  // night pv is zero
  REQUIRE(pv.at(0, 2) == 0.0);
}

TEST_CASE("trace wrapping indexes within the day") {
  Trace t;
  t.steps_per_day = 24;
  t.values.resize(48);
  for (int i = 0; i < 48; ++i) t.values[i] = i;
  REQUIRE(t.at(0, -1) == 23.0);  // wraps to the end of day 0
  REQUIRE(t.at(1, -2) == 24.0 + 22.0);
  REQUIRE(t.at(1, 25) == 24.0 + 1.0);
}
