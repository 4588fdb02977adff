#include "georeg/alignment.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "georeg/error.hpp"
#include "georeg/geo.hpp"
#include "georeg/simd.hpp"

namespace georeg {

double SimilarityVector::max() const {
  if (scores.empty()) fail(ErrorCode::EmptySet, "empty similarity vector");
  return *std::max_element(scores.begin(), scores.end());
}

double SimilarityVector::min() const {
  if (scores.empty()) fail(ErrorCode::EmptySet, "empty similarity vector");
  return *std::min_element(scores.begin(), scores.end());
}

int SimilarityVector::argmax() const {
  if (scores.empty()) fail(ErrorCode::EmptySet, "empty similarity vector");
  return static_cast<int>(std::max_element(scores.begin(), scores.end()) - scores.begin());
}

namespace {

void check_shapes(const FeatureMap& fg, const FeatureMap& fs) {
  if (fg.height() != fs.height() || fg.channels() != fs.channels() || fg.width() < 1 || fg.width() > fs.width())
    fail(ErrorCode::ShapeMismatch, "ground features " + std::to_string(fg.width()) + "x" + std::to_string(fg.height()) +
                                       "x" + std::to_string(fg.channels()) + " incompatible with reference " +
                                       std::to_string(fs.width()) + "x" + std::to_string(fs.height()) + "x" +
                                       std::to_string(fs.channels()));
}

}  // namespace

SimilarityVector sliding_similarity(const FeatureMap& fg, const FeatureMap& fs) {
  check_shapes(fg, fs);
  const int ws = fs.width();
  SimilarityVector s;
  s.scores.assign(ws, 0.0);
  for (int i = 0; i < ws; ++i) {
    double acc = 0.0;
    for (int k = 0; k < fg.channels(); ++k)
      for (int h = 0; h < fg.height(); ++h)
        for (int w = 0; w < fg.width(); ++w) acc += fg.at(w, h, k) * fs.at((w + i) % ws, h, k);
    s.scores[i] = acc;
  }
  return s;
}

SimilarityVector sliding_similarity_fast(const FeatureMap& fg, const FeatureMap& fs) {
  check_shapes(fg, fs);
  const int ws = fs.width();
  const std::size_t col = static_cast<std::size_t>(fs.column_size());
  const std::size_t window = static_cast<std::size_t>(fg.width()) * col;
  // fs followed by its first W_G - 1 columns: every circular window becomes
  // one contiguous span.
  std::vector<double> extended(static_cast<std::size_t>(ws + fg.width() - 1) * col);
  auto src = fs.values();
  std::copy(src.begin(), src.end(), extended.begin());
  std::copy(src.begin(), src.begin() + static_cast<std::ptrdiff_t>((fg.width() - 1) * col),
            extended.begin() + static_cast<std::ptrdiff_t>(src.size()));
  const auto& kern = simd::active();
  SimilarityVector s;
  s.scores.resize(ws);
  const double* g = fg.values().data();
  for (int i = 0; i < ws; ++i) s.scores[i] = kern.dot(g, extended.data() + i * col, window);
  return s;
}

std::vector<LocalMaximum> circular_local_maxima(std::span<const double> scores) {
  std::vector<LocalMaximum> maxima;
  const int n = static_cast<int>(scores.size());
  if (n == 0) return maxima;
  int start = -1;
  for (int i = 0; i < n; ++i)
    if (scores[i] != scores[wrap_index(i - 1, n)]) {
      start = i;
      break;
    }
  if (start < 0) return maxima;  // constant

  int i = start;
  int visited = 0;
  while (visited < n) {
    const int run_start = i;
    int len = 1;
    while (len < n && scores[wrap_index(run_start + len, n)] == scores[run_start]) ++len;
    const double left = scores[wrap_index(run_start - 1, n)];
    const double right = scores[wrap_index(run_start + len, n)];
    if (left < scores[run_start] && right < scores[run_start]) maxima.push_back({run_start, scores[run_start]});
    visited += len;
    i = wrap_index(run_start + len, n);
  }
  std::sort(maxima.begin(), maxima.end(), [](const LocalMaximum& a, const LocalMaximum& b) { return a.bin < b.bin; });
  return maxima;
}

namespace {

double ratio_test(double best, double second, double floor) {
  const double s1 = best - floor;
  const double s2 = second - floor;
  if (!(s1 > 0.0)) return 0.0;
  return std::clamp(1.0 - s2 / s1, 0.0, 1.0);
}

}  // namespace

AlignmentResult best_alignment(const SimilarityVector& s) {
  AlignmentResult r;
  r.best_bin = s.argmax();
  r.best_degrees = 360.0 * r.best_bin / s.size();
  r.local_maxima = circular_local_maxima(s.scores);
  if (r.local_maxima.empty()) {
    r.ratio_confidence = 0.0;
    return r;
  }
  if (r.local_maxima.size() == 1) {
    r.ratio_confidence = 1.0;
    return r;
  }
  std::vector<double> peak_scores;
  peak_scores.reserve(r.local_maxima.size());
  for (const auto& m : r.local_maxima) peak_scores.push_back(m.score);
  std::partial_sort(peak_scores.begin(), peak_scores.begin() + 2, peak_scores.end(), std::greater<>());
  r.ratio_confidence = ratio_test(peak_scores[0], peak_scores[1], s.min());
  return r;
}

AlignmentResult best_alignment_within(const SimilarityVector& s, double center_degrees, double half_window_degrees) {
  if (s.scores.empty()) fail(ErrorCode::EmptySet, "empty similarity vector");
  const int n = s.size();
  const double g = s.granularity_degrees();
  std::vector<char> inside(n, 0);
  int best = -1;
  for (int b = 0; b < n; ++b) {
    if (angular_error(b * g, center_degrees) <= half_window_degrees + 1e-9) {
      inside[b] = 1;
      if (best < 0 || s.scores[b] > s.scores[best]) best = b;
    }
  }
  if (best < 0) {
    // Window narrower than one bin: the nearest bin is the only candidate.
    best = wrap_index(std::lround(wrap360(center_degrees) / g), n);
    inside[best] = 1;
  }
  AlignmentResult r;
  r.best_bin = best;
  r.best_degrees = best * g;
  r.local_maxima = circular_local_maxima(s.scores);
  double outside = -std::numeric_limits<double>::infinity();
  for (const auto& m : r.local_maxima)
    if (!inside[m.bin]) outside = std::max(outside, m.score);
  if (std::isinf(outside)) {
    r.ratio_confidence = s.max() > s.min() ? 1.0 : 0.0;
  } else {
    r.ratio_confidence = ratio_test(s.scores[best], outside, s.min());
  }
  return r;
}

FeatureMap shifted_reference_window(const FeatureMap& fs, int bin, int width) {
  if (bin < 0 || bin >= fs.width() || width < 1 || width > fs.width())
    fail(ErrorCode::BadWindow, "window [" + std::to_string(bin) + ", +" + std::to_string(width) +
                                   ") invalid for width " + std::to_string(fs.width()));
  FeatureMap out(width, fs.height(), fs.channels());
  for (int w = 0; w < width; ++w) {
    auto src = fs.column((bin + w) % fs.width());
    std::copy(src.begin(), src.end(), out.column(w).begin());
  }
  return out;
}

SimilarityVector circshift(const SimilarityVector& s, int k) {
  SimilarityVector out;
  const int n = s.size();
  out.scores.resize(n);
  for (int i = 0; i < n; ++i) out.scores[i] = s.scores[wrap_index(static_cast<long long>(i) + k, n)];
  return out;
}

}  // namespace georeg
