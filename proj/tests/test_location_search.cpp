#include <cmath>

#include "doctest.h"
#include "georeg/error.hpp"
#include "georeg/extractor.hpp"
#include "georeg/location_search.hpp"
#include "georeg/synthetic_world.hpp"
#include "support.hpp"

using namespace georeg;

namespace {

struct Fixture {
  GeoRaster world;
  GeometryConfig geometry{144.0, 0, 256, 32};
  HandcraftedExtractor extractor{HandcraftedConfig{4, 8, 1.0}};
  std::vector<TrajectoryFrame> frames;
  std::vector<FrameObservation> obs;

  explicit Fixture(std::uint64_t seed, TrajectorySpec t = {}) {
    WorldSpec w;
    w.seed = seed;
    w.extent_meters = 260;
    world = generate_world(w);
    t.duration_seconds = 20 / 15.0;
    t.sweep_degrees = 40;
    t.start_heading = 10.0 * static_cast<double>(seed % 36);
    frames = generate_trajectory(world, t, geometry);
    for (const auto& f : frames) obs.push_back(f.observation);
  }
};

double meters_between(const GeoPoint& a, const GeoPoint& b) {
  const EastNorth d = to_local(a, b);
  return std::hypot(d.east, d.north);
}

}  // namespace

TEST_SUITE("location-search") {

TEST_CASE("grid sizes") {
  const GeoPoint prior{37.4275, -122.1697};
  CHECK(sample_grid(prior, SearchConfig{}).size() == 51 * 51);
  SearchConfig zero;
  zero.region_east = zero.region_north = 0;
  const auto one = sample_grid(prior, zero);
  REQUIRE(one.size() == 1);
  CHECK(meters_between(one[0], prior) < 1e-9);
  SearchConfig coarse;
  coarse.spacing = 100;
  const auto corners = sample_grid(prior, coarse);
  REQUIRE(corners.size() == 4);
  const EastNorth nw = to_local(prior, corners[0]);
  CHECK(nw.east == doctest::Approx(-50).epsilon(1e-6));
  CHECK(nw.north == doctest::Approx(50).epsilon(1e-6));
  const EastNorth se = to_local(prior, corners[3]);
  CHECK(se.east == doctest::Approx(50).epsilon(1e-6));
  CHECK(se.north == doctest::Approx(-50).epsilon(1e-6));
}

TEST_CASE("grid is centered and row-major from the north-west") {
  const GeoPoint prior{10.0, 20.0};
  SearchConfig c;
  c.region_east = 8;
  c.region_north = 4;
  c.spacing = 2;
  const auto g = sample_grid(prior, c);
  REQUIRE(g.size() == 5 * 3);
  CHECK(meters_between(g[7], prior) < 1e-6);
  CHECK(to_local(prior, g[1]).east > to_local(prior, g[0]).east);
  CHECK(to_local(prior, g[5]).north < to_local(prior, g[0]).north);
}

TEST_CASE("stationary user: location and heading recovered") {
  Fixture fx(51);
  const GeoPoint truth = fx.frames[0].truth.position;
  const GeoPoint prior = from_local(truth, {6.0, -4.0});
  SearchConfig c;
  c.region_east = c.region_north = 20;
  const SearchResult r = search(fx.obs, prior, fx.world, fx.extractor, fx.geometry, c);
  CHECK(r.grid_size == 121);
  CHECK(r.candidates.size() == 25);
  CHECK(meters_between(r.best.location, truth) <= 2.0 / std::sqrt(2.0) * 1.5);
  CHECK(testing::wrapped_error(r.best.heading_degrees, fx.frames[0].truth.heading_degrees) <= 360.0 / 64 + 1e-9);
  for (const auto& h : r.candidates)
    if (h.consistent) CHECK(r.best.score >= h.score);
}

TEST_CASE("single-sample region returns that sample") {
  Fixture fx(52);
  const GeoPoint truth = fx.frames[0].truth.position;
  SearchConfig c;
  c.region_east = c.region_north = 0;
  const SearchResult r = search(fx.obs, truth, fx.world, fx.extractor, fx.geometry, c);
  CHECK(r.grid_size == 1);
  CHECK(r.best.grid_index == 0);
  CHECK(meters_between(r.best.location, truth) < 1e-9);
}

TEST_CASE("deterministic and sound pruning") {
  Fixture fx(53);
  const GeoPoint truth = fx.frames[0].truth.position;
  SearchConfig c;
  c.region_east = c.region_north = 12;
  c.top_n = 5;
  const SearchResult a = search(fx.obs, truth, fx.world, fx.extractor, fx.geometry, c);
  const SearchResult b = search(fx.obs, truth, fx.world, fx.extractor, fx.geometry, c);
  CHECK(a.best.grid_index == b.best.grid_index);
  CHECK(a.best.score == b.best.score);
  REQUIRE(a.candidates.size() == b.candidates.size());
  for (std::size_t i = 0; i < a.candidates.size(); ++i) CHECK(a.candidates[i].grid_index == b.candidates[i].grid_index);
  // Candidates are in frame-0 rank order; the truth (grid center) ranks first here and survives.
  for (std::size_t i = 1; i < a.candidates.size(); ++i) CHECK(a.candidates[i - 1].frame0_score >= a.candidates[i].frame0_score);
  bool kept = false;
  for (const auto& h : a.candidates) kept |= h.grid_index == 24;
  CHECK(kept);
}

TEST_CASE("moving user: odometry propagates the candidates") {
  TrajectorySpec t;
  t.kind = TrajectoryKind::Waypoints;
  t.waypoints = {{10, 10}};
  t.heading_offset = 30;
  Fixture fx(54, t);
  const GeoPoint truth = fx.frames[0].truth.position;
  SearchConfig c;
  c.region_east = c.region_north = 10;
  const SearchResult r = search(fx.obs, from_local(truth, {2, 2}), fx.world, fx.extractor, fx.geometry, c);
  CHECK(meters_between(r.best.location, truth) <= 3.0);
}

TEST_CASE("errors") {
  Fixture fx(55);
  SearchConfig c;
  c.region_east = c.region_north = 4;
  c.similarity_threshold = 1e9;
  try {
    search(fx.obs, fx.frames[0].truth.position, fx.world, fx.extractor, fx.geometry, c);
    FAIL("expected NoConsistentHypothesis");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NoConsistentHypothesis);
  }
  c.similarity_threshold.reset();
  std::vector<FrameObservation> few(fx.obs.begin(), fx.obs.begin() + 5);
  CHECK_THROWS_AS(search(few, fx.frames[0].truth.position, fx.world, fx.extractor, fx.geometry, c), Error);
  c.spacing = 0;
  CHECK_THROWS_AS(validate(c), Error);
  CHECK(SearchConfig{}.top_n == 25);
  CHECK(SearchConfig{}.consistency_frames == 20);
}

}  // TEST_SUITE
