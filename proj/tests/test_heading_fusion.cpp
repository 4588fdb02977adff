#include <cmath>
#include <random>

#include "doctest.h"
#include "georeg/error.hpp"
#include "georeg/heading_fusion.hpp"
#include "georeg/synthetic_world.hpp"
#include "support.hpp"

using namespace georeg;

namespace {

HeadingEstimate measurement(double heading, bool accepted = true) {
  HeadingEstimate m;
  m.heading_degrees = heading;
  m.accepted = accepted;
  m.ratio_confidence = 1;
  return m;
}

}  // namespace

TEST_SUITE("heading-fusion") {

TEST_CASE("predict") {
  FusionState s;
  s.heading = 42;
  const FusionState same = predict(s, 0, 0);
  CHECK(same.heading == s.heading);
  CHECK(same.variance == s.variance);
  const FusionState p = predict(s, 330, 2);
  CHECK(p.heading == doctest::Approx(12));
  CHECK(p.variance == doctest::Approx(27));
  CHECK(predict(s, 0, 0.01).variance > s.variance);
  CHECK_THROWS_AS(predict(s, 0, -1), Error);
}

TEST_CASE("noise-free dead reckoning equals the simulator integral") {
  TrajectorySpec t;
  t.sweep_degrees = 270;
  t.start_heading = 20;
  const auto frames = generate_poses(t, GeoPoint{37.4275, -122.1697});
  FusionState s;
  s.heading = frames[0].truth.heading_degrees;
  for (std::size_t i = 1; i < frames.size(); ++i) {
    s = predict(s, frames[i].observation.heading_delta, 1 / 15.0);
    REQUIRE(testing::wrapped_error(s.heading, frames[i].truth.heading_degrees) < 1e-9);
  }
}

TEST_CASE("correct: limits and halfway gain") {
  FusionState s;
  s.heading = 10;
  s.variance = 4;
  s.measurement_variance = 4;
  const FusionState half = correct(s, measurement(30));
  CHECK(half.heading == doctest::Approx(20));
  CHECK(half.variance == doctest::Approx(2));
  s.measurement_variance = 1e-12;
  const FusionState snap = correct(s, measurement(123));
  CHECK(snap.heading == doctest::Approx(123).epsilon(1e-9));
  CHECK(snap.variance < 1e-9);
}

TEST_CASE("rejected measurements are ignored") {
  FusionState s;
  s.heading = 10;
  const FusionState out = correct(s, measurement(200, false));
  CHECK(out.heading == s.heading);
  CHECK(out.variance == s.variance);
}

TEST_CASE("wrapped innovation goes the short way") {
  FusionState s;
  s.heading = 1;
  s.variance = 4;
  s.measurement_variance = 4;
  const FusionState out = correct(s, measurement(359));
  CHECK(testing::wrapped_error(out.heading, 0.0) < 1e-9);
  s.heading = 179;
  CHECK(correct(s, measurement(-179)).heading == doctest::Approx(180));
}

TEST_CASE("three-step trace matches a hand Kalman recursion") {
  // var0 = 25, q = 1 deg^2/s, r = 4.
  FusionState s;
  s.heading = 100;
  s.variance = 25;
  s.process_noise_rate = 1;
  s.measurement_variance = 4;
  double h = 100, p = 25;
  const double deltas[3] = {5, -3, 2}, dts[3] = {1, 2, 0.5}, z[3] = {108, 101, 104};
  for (int i = 0; i < 3; ++i) {
    s = predict(s, deltas[i], dts[i]);
    s = correct(s, measurement(z[i]));
    h += deltas[i];
    p += 1 * dts[i];
    const double k = p / (p + 4);
    h += k * (z[i] - h);
    p *= 1 - k;
    CHECK(std::fabs(s.heading - h) < 1e-9);
    CHECK(std::fabs(s.variance - p) < 1e-9);
  }
  // Literal values for the first step: p = 26, K = 26/30, h = 105 + 26/30 * 3.
  FusionState f;
  f.heading = 100;
  f = correct(predict(f, 5, 1), measurement(108));
  CHECK(std::fabs(f.heading - (105 + 2.6)) < 1e-9);
  CHECK(std::fabs(f.variance - 26 * 4 / 30.0) < 1e-9);
}

TEST_CASE("variance monotonicity") {
  std::mt19937_64 rng(60);
  std::uniform_real_distribution<double> u(0, 360);
  FusionState s;
  for (int i = 0; i < 500; ++i) {
    const FusionState p = predict(s, u(rng) - 180, 0.1);
    REQUIRE(p.variance >= s.variance);
    const FusionState c = correct(p, measurement(u(rng)));
    REQUIRE(c.variance <= p.variance);
    REQUIRE(c.heading >= 0.0);
    REQUIRE(c.heading < 360.0);
    s = c;
  }
}

TEST_CASE("long-run drift stays bounded with periodic corrections") {
  std::mt19937_64 rng(61);
  std::normal_distribution<double> n(0, 1);
  const double sigma = 0.5, e = 1.0, period = 150;
  FusionState s;
  s.process_noise_rate = sigma * sigma * 15;
  s.measurement_variance = e * e;
  double truth = 0, worst = 0;
  for (int i = 1; i <= 3000; ++i) {
    const double d = n(rng);
    truth = wrap360(truth + d);
    s = predict(s, d + sigma * n(rng), 1 / 15.0);
    if (i % static_cast<int>(period) == 0) {
      s = correct(s, measurement(wrap360(truth + e * (2 * std::uniform_real_distribution<double>(0, 1)(rng) - 1))));
      worst = std::max(worst, testing::wrapped_error(s.heading, truth));
    }
  }
  // e + a few standard deviations of the drift accumulated over one period.
  CHECK(worst < e + 4 * sigma * std::sqrt(period));
}

TEST_CASE("validation") {
  FusionState s;
  s.variance = 0;
  CHECK_THROWS_AS(validate(s), Error);
}

}  // TEST_SUITE
