#include <chrono>
#include <cmath>
#include <random>

#include "doctest.h"
#include "georeg/alignment.hpp"
#include "georeg/error.hpp"
#include "georeg/simd.hpp"
#include "support.hpp"

using namespace georeg;

TEST_SUITE("orientation-alignment") {

TEST_CASE("all-ones maps give a constant vector") {
  const FeatureMap fg(5, 3, 2, 1.0), fs(12, 3, 2, 1.0);
  const SimilarityVector s = sliding_similarity(fg, fs);
  REQUIRE(s.size() == 12);
  for (double v : s.scores) CHECK(v == 5 * 3 * 2);
  CHECK(s.granularity_degrees() == 30.0);
}

TEST_CASE("brute force matches the independent triple loop bit for bit") {
  std::mt19937_64 rng(10);
  for (int t = 0; t < 20; ++t) {
    const FeatureMap fs = testing::random_map(rng, 24, 3, 4);
    const FeatureMap fg = testing::random_map(rng, 7, 3, 4);
    CHECK(sliding_similarity(fg, fs).scores == testing::oracle_similarity(fg, fs));
  }
}

TEST_CASE("window of the reference is found at its offset") {
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<int> pick(0, 63);
  int hits = 0;
  for (int t = 0; t < 100; ++t) {
    const FeatureMap fs = testing::random_map(rng, 64, 4, 4);
    const int k = pick(rng);
    const FeatureMap fg = testing::oracle_window(fs, k, 12);
    const auto s = sliding_similarity_fast(fg, fs);
    hits += s.argmax() == k && testing::oracle_argmax(testing::oracle_similarity(fg, fs)) == k;
  }
  CHECK(hits == 100);
}

TEST_CASE("fast path equals brute force under every available ISA") {
  std::mt19937_64 rng(12);
  const simd::Isa before = simd::active().isa;
  for (simd::Isa isa : {simd::Isa::Scalar, simd::Isa::Avx2, simd::Isa::Neon}) {
    if (!simd::is_available(isa)) continue;
    simd::select(isa);
    for (int t = 0; t < 50; ++t) {
      const FeatureMap fs = testing::random_map(rng, 64, 4, 8);
      const FeatureMap fg = testing::random_map(rng, 1 + t % 64, 4, 8);
      const auto fast = sliding_similarity_fast(fg, fs);
      const auto slow = sliding_similarity(fg, fs);
      const double tol = 1e-5 * fg.width() * fg.height() * fg.channels();
      for (int i = 0; i < 64; ++i) REQUIRE(std::fabs(fast.scores[i] - slow.scores[i]) < tol);
    }
  }
  simd::select(before);
}

TEST_CASE("zero ground features give zero scores") {
  std::mt19937_64 rng(13);
  const FeatureMap fs = testing::random_map(rng, 16, 2, 2);
  for (double v : sliding_similarity_fast(FeatureMap(4, 2, 2), fs).scores) CHECK(v == 0.0);
}

TEST_CASE("shape errors") {
  auto code = [](auto fn) {
    try {
      fn();
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::Io;
  };
  CHECK(code([] { sliding_similarity(FeatureMap(4, 2, 3), FeatureMap(8, 3, 3)); }) == ErrorCode::ShapeMismatch);
  CHECK(code([] { sliding_similarity_fast(FeatureMap(4, 2, 3), FeatureMap(8, 2, 2)); }) == ErrorCode::ShapeMismatch);
  CHECK(code([] { sliding_similarity(FeatureMap(9, 2, 3), FeatureMap(8, 2, 3)); }) == ErrorCode::ShapeMismatch);
}

TEST_CASE("circular equivariance holds exactly") {
  std::mt19937_64 rng(14);
  for (int t = 0; t < 20; ++t) {
    const FeatureMap fs = testing::random_map(rng, 40, 2, 3);
    const FeatureMap fg = testing::random_map(rng, 9, 2, 3);
    const auto base = sliding_similarity(fg, fs);
    for (int j : {1, 7, 39}) {
      const auto moved = sliding_similarity(fg, circshift(fs, j));
      for (int i = 0; i < 40; ++i) REQUIRE(moved.scores[i] == base.scores[(i + j) % 40]);
    }
  }
}

TEST_CASE("self match peaks at zero with score one") {
  std::mt19937_64 rng(15);
  const FeatureMap fs = testing::random_map(rng, 32, 3, 3);
  const auto s = sliding_similarity_fast(fs, fs);
  CHECK(s.scores[0] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(s.argmax() == 0);
}

TEST_CASE("argmax is invariant to positive scaling") {
  std::mt19937_64 rng(16);
  FeatureMap fs = testing::random_map(rng, 30, 2, 2);
  FeatureMap fg = testing::random_map(rng, 6, 2, 2);
  const int before = sliding_similarity(fg, fs).argmax();
  for (double& v : fs.values()) v *= 3.7;
  for (double& v : fg.values()) v *= 0.01;
  CHECK(sliding_similarity(fg, fs).argmax() == before);
}

TEST_CASE("best_alignment examples") {
  SimilarityVector s{{0, 3, 1}};
  const auto a = best_alignment(s);
  CHECK(a.best_bin == 1);
  CHECK(a.best_degrees == 120.0);
  REQUIRE(a.local_maxima.size() == 1);
  CHECK(a.ratio_confidence == 1.0);

  // Peaks 1.0 and 0.4 over a zero floor.
  SimilarityVector p{{0, 1.0, 0, 0, 0.4, 0}};
  CHECK(best_alignment(p).ratio_confidence == doctest::Approx(1 - 0.4 / 1.0));

  SimilarityVector tie{{0, 2, 0, 2}};
  CHECK(best_alignment(tie).ratio_confidence == 0.0);
  CHECK(best_alignment(tie).best_bin == 1);

  SimilarityVector flat{{5, 5, 5}};
  CHECK(best_alignment(flat).ratio_confidence == 0.0);
  CHECK(best_alignment(flat).best_bin == 0);
}

TEST_CASE("ratio confidence uses the min-shifted vector") {
  SimilarityVector s{{-2, -0.5, -2, -1.25, -2}};
  // shifted: 0, 1.5, 0, 0.75, 0 -> 1 - 0.75/1.5
  CHECK(best_alignment(s).ratio_confidence == doctest::Approx(0.5));
}

TEST_CASE("local maxima: plateaus count once at their leftmost bin") {
  const std::vector<double> v{1, 3, 3, 1, 2, 0};
  const auto m = circular_local_maxima(v);
  REQUIRE(m.size() == 2);
  CHECK(m[0].bin == 1);
  CHECK(m[1].bin == 4);
  // Wrap-around neighbour.
  const auto w = circular_local_maxima(std::vector<double>{5, 1, 2, 1});
  REQUIRE(w.size() == 2);
  CHECK(w[0].bin == 0);
}

TEST_CASE("restricted argmax stays inside the window") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(0, 1);
  for (int t = 0; t < 50; ++t) {
    SimilarityVector s;
    for (int i = 0; i < 360; ++i) s.scores.push_back(u(rng));
    const double center = 360 * u(rng);
    const auto a = best_alignment_within(s, center, 6.0);
    CHECK(testing::wrapped_error(a.best_degrees, center) <= 6.0 + 1e-9);
    CHECK(a.ratio_confidence >= 0.0);
    CHECK(a.ratio_confidence <= 1.0);
  }
}

TEST_CASE("shifted_reference_window") {
  std::mt19937_64 rng(18);
  const FeatureMap fs = testing::random_map(rng, 10, 2, 3);
  CHECK(shifted_reference_window(fs, 0, 10) == fs);
  const FeatureMap wrap = shifted_reference_window(fs, 9, 2);
  CHECK(wrap == testing::oracle_window(fs, 9, 2));
  for (int k = 0; k < 10; ++k) CHECK(sliding_similarity(shifted_reference_window(fs, k, 4), fs).argmax() == k);
  CHECK_THROWS_AS(shifted_reference_window(fs, 10, 2), Error);
  CHECK_THROWS_AS(shifted_reference_window(fs, 0, 11), Error);
  CHECK_THROWS_AS(shifted_reference_window(fs, -1, 2), Error);
}

TEST_CASE("similarity circshift convention") {
  SimilarityVector s{{0, 1, 2, 3}};
  CHECK(circshift(s, 1).scores == std::vector<double>{1, 2, 3, 0});
  CHECK(circshift(s, -1).scores == std::vector<double>{3, 0, 1, 2});
}

TEST_CASE("fast path is at least ten times faster at W_S=360, H_D=16, K_D=16") {
  std::mt19937_64 rng(19);
  const FeatureMap fs = testing::random_map(rng, 360, 16, 16);
  const FeatureMap fg = testing::random_map(rng, 69, 16, 16);
  using clock = std::chrono::steady_clock;
  auto time = [&](auto fn, int reps) {
    const auto t0 = clock::now();
    double sink = 0;
    for (int r = 0; r < reps; ++r) sink += fn(fg, fs).scores[r % 360];
    CHECK(std::isfinite(sink));
    return std::chrono::duration<double>(clock::now() - t0).count() / reps;
  };
  const double slow = time([](const FeatureMap& a, const FeatureMap& b) { return sliding_similarity(a, b); }, 3);
  const double fast = time([](const FeatureMap& a, const FeatureMap& b) { return sliding_similarity_fast(a, b); }, 10);
  MESSAGE("brute force " << slow * 1e3 << " ms, fast " << fast * 1e3 << " ms");
  CHECK(slow / fast >= 10.0);
}

}  // TEST_SUITE
