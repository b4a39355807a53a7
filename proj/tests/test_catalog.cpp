#include <doctest.h>

#include <algorithm>
#include <sstream>

#include "quakecast/catalog.hpp"
#include "quakecast/util.hpp"
#include "testutil.hpp"

using namespace quakecast;

TEST_SUITE_BEGIN("catalog");

TEST_CASE("parses a USGS-style row with spaces and maps fields directly") {
  std::istringstream in(
      "time,latitude,longitude,depth,mag\n"
      "2019-07-06T03:19:53Z, 35.77, -117.599, 8.0, 7.1\n");
  ParseResult r = parse_catalog(in);
  REQUIRE(r.events.size() == 1);
  CHECK(r.events[0].magnitude == doctest::Approx(7.1));
  CHECK(r.events[0].latitude == doctest::Approx(35.77));
  CHECK(r.events[0].time == parse_utc("2019-07-06T03:19:53Z"));
  CHECK(r.rows_skipped == 0);
}

TEST_CASE("empty file with a valid header gives an empty list") {
  std::istringstream in("time,latitude,longitude,depth,mag\n");
  ParseResult r = parse_catalog(in);
  CHECK(r.events.empty());
  CHECK(r.rows_total == 0);
  CHECK(r.rows_skipped == 0);
}

TEST_CASE("out-of-order rows come back sorted by time (naive sort oracle)") {
  std::istringstream in(
      "time,latitude,longitude,depth,mag\n"
      "2001-03-01T00:00:00Z,33.0,-117.0,5.0,2.0\n"
      "2000-01-01T00:00:00Z,33.1,-117.1,5.0,3.0\n"
      "2000-06-15T12:00:00Z,33.2,-117.2,5.0,1.0\n");
  ParseResult r = parse_catalog(in);
  REQUIRE(r.events.size() == 3);
  std::vector<std::int64_t> times;
  for (const CatalogEvent& e : r.events) times.push_back(e.time);
  std::vector<std::int64_t> expected = times;
  std::sort(expected.begin(), expected.end());
  CHECK(times == expected);
  CHECK(r.events[0].magnitude == doctest::Approx(3.0));
}

TEST_CASE("missing required column is a hard failure naming it") {
  std::istringstream in("time,latitude,longitude,depth\n2000-01-01T00:00:00Z,33,-117,5\n");
  CHECK_THROWS_WITH_AS(parse_catalog(in), doctest::Contains("mag"), std::runtime_error);
}

TEST_CASE("bad rows are skipped and counted, never silently dropped") {
  std::istringstream in(
      "time,latitude,longitude,depth,mag\n"
      "2000-01-01T00:00:00Z,33.0,-117.0,5.0,2.0\n"
      "not-a-time,33.0,-117.0,5.0,2.0\n"
      "2000-01-02T00:00:00Z,33.0,-117.0,5.0,oops\n"
      "2000-01-03T00:00:00Z,95.0,-117.0,5.0,2.0\n");
  ParseResult r = parse_catalog(in);
  CHECK(r.events.size() == 1);
  CHECK(r.rows_total == 4);
  CHECK(r.rows_skipped == 3);
  CHECK(r.events.size() + r.rows_skipped == r.rows_total);
}

TEST_CASE("negative magnitudes are clamped to zero and counted") {
  std::istringstream in(
      "time,latitude,longitude,depth,mag\n"
      "2000-01-01T00:00:00Z,33.0,-117.0,5.0,-0.3\n");
  ParseResult r = parse_catalog(in);
  REQUIRE(r.events.size() == 1);
  CHECK(r.events[0].magnitude == 0.0);
  CHECK(r.magnitudes_clamped == 1);
}

TEST_CASE("extra columns and quoted commas are tolerated") {
  std::istringstream in(
      "time,latitude,longitude,depth,mag,magType,place\n"
      "2019-07-06T03:19:53.040Z,35.77,-117.599,8.0,7.1,mw,\"2019 Ridgecrest, CA sequence\"\n");
  ParseResult r = parse_catalog(in);
  REQUIRE(r.events.size() == 1);
  CHECK(r.events[0].time == parse_utc("2019-07-06T03:19:53Z"));  // sub-second truncated
}

TEST_CASE("sub-second timestamps truncate to whole seconds") {
  CHECK(parse_utc("2019-07-06T03:19:53.999Z") == parse_utc("2019-07-06T03:19:53Z"));
}

TEST_CASE("region filter boundaries are half-open above, closed below") {
  RegionFilter f{32.0, 36.0, -120.0, -114.0, 0, 100};
  CatalogEvent at_top{.time = 50, .latitude = 36.0, .longitude = -117.0};
  CatalogEvent at_bottom{.time = 50, .latitude = 32.0, .longitude = -120.0};
  CHECK(filter_region({at_top}, f).empty());
  CHECK(filter_region({at_bottom}, f).size() == 1);
}

TEST_CASE("region filter keeps exactly the in-box events in order (brute force)") {
  Rng rng(7);
  RegionFilter f{33.0, 34.0, -118.0, -117.0, 1000, 2000};
  std::vector<CatalogEvent> events;
  for (int i = 0; i < 10; ++i) {
    CatalogEvent e;
    e.time = 900 + i * 130;  // some outside [1000, 2000)
    e.latitude = rng.uniform(32.5, 34.5);
    e.longitude = rng.uniform(-118.5, -116.5);
    e.magnitude = rng.uniform(0.0, 5.0);
    events.push_back(e);
  }
  std::vector<CatalogEvent> kept = filter_region(events, f);
  std::vector<CatalogEvent> expected;
  for (const CatalogEvent& e : events) {
    bool in = e.latitude >= 33.0 && e.latitude < 34.0 && e.longitude >= -118.0 &&
              e.longitude < -117.0 && e.time >= 1000 && e.time < 2000;
    if (in) expected.push_back(e);
  }
  REQUIRE(kept.size() == expected.size());
  for (std::size_t i = 0; i < kept.size(); ++i) CHECK(kept[i].time == expected[i].time);
}

TEST_CASE("filter is idempotent") {
  std::vector<CatalogEvent> events = testutil::mini_catalog_events();
  RegionFilter f = testutil::mini_region();
  std::vector<CatalogEvent> once = filter_region(events, f);
  std::vector<CatalogEvent> twice = filter_region(once, f);
  REQUIRE(once.size() == twice.size());
  for (std::size_t i = 0; i < once.size(); ++i) {
    CHECK(once[i].time == twice[i].time);
    CHECK(once[i].latitude == twice[i].latitude);
  }
}

TEST_CASE("sorting is stable for equal timestamps") {
  std::istringstream in(
      "time,latitude,longitude,depth,mag\n"
      "2000-01-01T00:00:00Z,33.1,-117.0,5.0,1.0\n"
      "2000-01-01T00:00:00Z,33.2,-117.0,5.0,2.0\n"
      "2000-01-01T00:00:00Z,33.3,-117.0,5.0,3.0\n");
  ParseResult r = parse_catalog(in);
  REQUIRE(r.events.size() == 3);
  CHECK(r.events[0].magnitude == 1.0);
  CHECK(r.events[1].magnitude == 2.0);
  CHECK(r.events[2].magnitude == 3.0);
}

TEST_SUITE_END();
