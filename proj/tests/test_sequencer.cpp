#include <cmath>
#include <random>

#include "doctest.h"
#include "georeg/error.hpp"
#include "georeg/extractor.hpp"
#include "georeg/sequencer.hpp"
#include "georeg/synthetic_world.hpp"
#include "support.hpp"

using namespace georeg;

namespace {

SimilarityVector peaked(int n, int peak, double height = 1.0) {
  SimilarityVector s{std::vector<double>(n, 0.0)};
  s.scores[wrap_index(peak, n)] = height;
  s.scores[wrap_index(peak - 1, n)] = 0.5 * height;
  s.scores[wrap_index(peak + 1, n)] = 0.5 * height;
  return s;
}

struct Scene {
  GeoRaster world;
  GeometryConfig geometry{144.0, 0, 256, 32};
  HandcraftedExtractor extractor{HandcraftedConfig{4, 8, 1.0}};
};

Scene scene(std::uint64_t seed) {
  WorldSpec w;
  w.seed = seed;
  w.extent_meters = 240;
  return {generate_world(w)};
}

}  // namespace

TEST_SUITE("sequential-georegistration") {

TEST_CASE("dummy orientation tracking") {
  CHECK(track_dummy_orientation(0, 0) == 0);
  CHECK(track_dummy_orientation(350, 20) == doctest::Approx(10));
  CHECK(track_dummy_orientation(10, -20) == doctest::Approx(350));
  SequenceAccumulator acc(SequencerConfig{});
  acc.push(peaked(64, 3), 123.0, 0.0);  // the first delta is ignored
  CHECK(acc.dummy_orientation() == 0.0);
}

TEST_CASE("noise-free odometry integrates to the simulator's relative heading") {
  TrajectorySpec t;
  t.kind = TrajectoryKind::Waypoints;
  t.waypoints = {{30, 0}, {30, 40}, {-10, 40}, {-10, -5}};
  t.duration_seconds = 40;
  t.heading_offset = 17;
  const auto frames = generate_poses(t, GeoPoint{37.4275, -122.1697});
  double y = 0;
  for (std::size_t i = 1; i < frames.size(); ++i) {
    y = track_dummy_orientation(y, frames[i].observation.heading_delta);
    REQUIRE(testing::wrapped_error(y, frames[i].truth.heading_degrees - frames[0].truth.heading_degrees) < 1e-9);
  }
}

TEST_CASE("accumulate: single entry is unchanged") {
  const BufferEntry e{peaked(32, 7), 123.0, 0.0};
  CHECK(accumulate(std::span<const BufferEntry>(&e, 1), 123.0).scores == e.similarity.scores);
}

TEST_CASE("accumulate: 45 degree rotation oracle") {
  std::mt19937_64 rng(30);
  std::normal_distribution<double> n(0, 1);
  SimilarityVector s1, s2;
  for (int i = 0; i < 360; ++i) s1.scores.push_back(n(rng)), s2.scores.push_back(n(rng));
  const std::vector<BufferEntry> buf{{s1, 0.0, 0.0}, {s2, 45.0, 0.1}};
  const auto out = accumulate(buf, 45.0);
  for (int i = 0; i < 360; ++i) REQUIRE(out.scores[i] == s2.scores[i] + s1.scores[(i - 45 + 360) % 360]);
  const auto shifted = circshift(s1, -45);
  for (int i = 0; i < 360; ++i) REQUIRE(out.scores[i] == s2.scores[i] + shifted.scores[i]);
}

TEST_CASE("accumulate: errors") {
  std::vector<BufferEntry> none;
  try {
    accumulate(none, 0);
    FAIL("expected EmptySet");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::EmptySet);
  }
  const std::vector<BufferEntry> mixed{{peaked(16, 0), 0, 0}, {peaked(32, 0), 0, 1}};
  try {
    accumulate(mixed, 0);
    FAIL("expected MixedGranularity");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::MixedGranularity);
  }
}

TEST_CASE("accumulate: constant offset of all orientations cancels") {
  std::mt19937_64 rng(31);
  std::normal_distribution<double> n(0, 1);
  std::vector<BufferEntry> a, b;
  for (int t = 0; t < 8; ++t) {
    SimilarityVector s;
    for (int i = 0; i < 72; ++i) s.scores.push_back(n(rng));
    a.push_back({s, 15.0 * t, 0.1 * t});
    b.push_back({s, wrap360(15.0 * t + 100.0), 0.1 * t});
  }
  CHECK(accumulate(a, 105.0).scores == accumulate(b, wrap360(205.0)).scores);
}

TEST_CASE("fov coverage examples") {
  auto cov = [](std::vector<double> ys, double fov) {
    std::vector<BufferEntry> buf;
    for (double y : ys) buf.push_back({peaked(8, 0), y, 0});
    return fov_coverage(buf, fov);
  };
  CHECK(cov({0}, 69) == doctest::Approx(69));
  CHECK(cov({0, 60}, 69) == doctest::Approx(129));
  CHECK(cov({0, 90, 180, 270}, 69) == doctest::Approx(4 * 69));
  CHECK(cov({0, 60, 120, 180, 240, 300}, 69) == 360);
  CHECK(cov({350, 10}, 20) == doctest::Approx(40));
  CHECK(cov({0, 0, 0}, 69) == doctest::Approx(69));
}

TEST_CASE("coverage never decreases as frames are added") {
  std::mt19937_64 rng(32);
  std::uniform_real_distribution<double> u(0, 360);
  std::vector<BufferEntry> buf;
  double prev = 0;
  for (int t = 0; t < 40; ++t) {
    buf.push_back({peaked(8, 0), u(rng), double(t)});
    const double c = fov_coverage(buf, 25);
    CHECK(c >= prev - 1e-12);
    CHECK(c <= 360.0);
    prev = c;
  }
}

TEST_CASE("buffer eviction by time and frame count") {
  SequencerConfig c;
  c.tau_seconds = 1.0;
  SequenceAccumulator acc(c);
  for (int i = 0; i < 60; ++i) {
    acc.push(peaked(64, i), 1.0, i * 0.125);
    for (const auto& e : acc.buffer()) REQUIRE(acc.buffer().back().timestamp - e.timestamp <= 1.0 + 1e-12);
  }
  CHECK(acc.buffer().size() == 9);
  c.max_frames = 5;
  SequenceAccumulator capped(c);
  for (int i = 0; i < 20; ++i) capped.push(peaked(64, i), 1.0, i / 15.0);
  CHECK(capped.buffer().size() == 5);
}

TEST_CASE("push leaves the state untouched on error") {
  SequenceAccumulator acc(SequencerConfig{});
  acc.push(peaked(64, 0), 0, 1.0);
  acc.push(peaked(64, 2), 10, 2.0);
  const auto before = acc.buffer().size();
  const double y = acc.dummy_orientation();
  CHECK_THROWS_AS(acc.push(peaked(64, 0), 5, 2.0), Error);  // not increasing
  CHECK_THROWS_AS(acc.push(peaked(32, 0), 5, 3.0), Error);  // granularity
  CHECK_THROWS_AS(acc.push(peaked(64, 0), std::nan(""), 3.0), Error);
  CHECK(acc.buffer().size() == before);
  CHECK(acc.dummy_orientation() == y);
  CHECK(acc.frames_seen() == 2);
  SequencerConfig r;
  r.mode = SequencerMode::Refine;
  SequenceAccumulator refine(r);
  try {
    refine.push(peaked(64, 0), 0, 0);
    FAIL("expected MissingPrior");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::MissingPrior);
  }
  CHECK(refine.buffer().empty());
}

TEST_CASE("gate soundness: low coverage is never accepted in cold start") {
  std::mt19937_64 rng(33);
  std::uniform_real_distribution<double> u(0, 1);
  SequencerConfig c;
  c.ratio_threshold = 0.0;
  SequenceAccumulator acc(c);
  for (int t = 0; t < 200; ++t) {
    SimilarityVector s;
    for (int i = 0; i < 64; ++i) s.scores.push_back(u(rng));
    const auto est = acc.push(s, u(rng) * 2 - 1, t / 15.0);
    if (est.fov_coverage_degrees < c.fov_threshold) REQUIRE_FALSE(est.accepted);
    if (est.accepted) {
      REQUIRE(est.ratio_confidence >= c.ratio_threshold);
      REQUIRE(est.fov_coverage_degrees >= c.fov_threshold);
    }
  }
}

TEST_CASE("refine mode never leaves the prior window") {
  SequencerConfig c;
  c.mode = SequencerMode::Refine;
  c.refine_window = 6;
  SequenceAccumulator acc(c);
  // Strong peak far away, weak one 3 degrees from the prior.
  SimilarityVector s{std::vector<double>(360, 0.0)};
  s.scores[200] = 5.0;
  s.scores[103] = 1.0;
  const auto est = acc.push(s, 0, 0, 100.0);
  CHECK(est.heading_degrees == 103.0);
  CHECK(est.mode == SequencerMode::Refine);
  CHECK(testing::wrapped_error(est.heading_degrees, 100.0) <= 6.0);
}

TEST_CASE("single stationary frame is rejected on coverage") {
  Scene sc = scene(41);
  TrajectorySpec t;
  t.duration_seconds = 1.0 / 15.0;
  const auto frames = generate_trajectory(sc.world, t, sc.geometry);
  REQUIRE(frames.size() == 1);
  Sequencer seq(sc.world, sc.extractor, sc.geometry, SequencerConfig{});
  const auto est = seq.step(frames[0].observation);
  CHECK(est.fov_coverage_degrees == doctest::Approx(69.0));
  CHECK_FALSE(est.accepted);
}

TEST_CASE("ten-frame sweep over 120 degrees finds the heading bin") {
  Scene sc = scene(42);
  TrajectorySpec t;
  t.start_heading = 33;
  t.sweep_degrees = 120;
  t.duration_seconds = 10 / 15.0;
  const auto frames = generate_trajectory(sc.world, t, sc.geometry);
  REQUIRE(frames.size() == 10);
  Sequencer seq(sc.world, sc.extractor, sc.geometry, SequencerConfig{});
  HeadingEstimate est;
  for (const auto& f : frames) est = seq.step(f.observation);
  const int ws = sc.geometry.polar_width / 4;
  const int truth_bin = wrap_index(std::llround(frames.back().truth.heading_degrees * ws / 360.0), ws);
  const int d = std::abs(est.best_bin - truth_bin);
  CHECK(std::min(d, ws - d) <= 1);
}

TEST_CASE("cold-start 180 degree sweep is accepted within one bin") {
  Scene sc = scene(43);
  TrajectorySpec t;
  t.start_heading = 250;
  const auto frames = generate_trajectory(sc.world, t, sc.geometry);
  Sequencer seq(sc.world, sc.extractor, sc.geometry, SequencerConfig{});
  HeadingEstimate est;
  for (const auto& f : frames) est = seq.step(f.observation);
  CHECK(est.accepted);
  CHECK(testing::wrapped_error(est.heading_degrees, frames.back().truth.heading_degrees) <= 360.0 / 64 + 1e-9);
}

TEST_CASE("sequencer is invariant to a constant dummy-orientation offset") {
  // The first frame fixes y = 0, so offsetting every delta after a leading
  // rotation of c reproduces the same trace.
  Scene sc = scene(44);
  TrajectorySpec t;
  t.sweep_degrees = 150;
  t.duration_seconds = 3;
  auto frames = generate_trajectory(sc.world, t, sc.geometry);
  SequenceAccumulator a(SequencerConfig{}), b(SequencerConfig{});
  Sequencer probe(sc.world, sc.extractor, sc.geometry, SequencerConfig{});
  std::vector<BufferEntry> ea, eb;
  double ya = 0, yb = 77;
  for (std::size_t i = 0; i < frames.size(); ++i) {
    const auto s = probe.frame_similarity(frames[i].observation);
    if (i > 0) ya = track_dummy_orientation(ya, frames[i].observation.heading_delta),
               yb = track_dummy_orientation(yb, frames[i].observation.heading_delta);
    ea.push_back({s, ya, frames[i].observation.timestamp});
    eb.push_back({s, yb, frames[i].observation.timestamp});
    const auto ra = a.evaluate(accumulate(ea, ya), fov_coverage(ea, 69), std::nullopt, 0);
    const auto rb = b.evaluate(accumulate(eb, yb), fov_coverage(eb, 69), std::nullopt, 0);
    REQUIRE(ra.accepted == rb.accepted);
    REQUIRE(ra.best_bin == rb.best_bin);
  }
}

TEST_CASE("config validation and mode names") {
  SequencerConfig c;
  CHECK_NOTHROW(validate(c));
  c.refine_window = 200;
  CHECK_THROWS_AS(validate(c), Error);
  c = {};
  c.ratio_threshold = 1.5;
  CHECK_THROWS_AS(validate(c), Error);
  CHECK(parse_sequencer_mode("refine") == SequencerMode::Refine);
  CHECK(std::string(to_string(SequencerMode::ColdStart)) == "cold-start");
  CHECK_THROWS_AS(parse_sequencer_mode("warm"), Error);
}

}  // TEST_SUITE
