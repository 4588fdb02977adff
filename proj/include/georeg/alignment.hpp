#pragma once

#include <span>
#include <vector>

#include "georeg/feature_map.hpp"

namespace georeg {

/// Similarity of a ground feature window against every circular offset of a
/// reference feature map; bin i corresponds to heading 360*i/W_S degrees.
struct SimilarityVector {
  std::vector<double> scores;

  int size() const noexcept { return static_cast<int>(scores.size()); }
  double granularity_degrees() const noexcept { return 360.0 / static_cast<double>(scores.size()); }
  double max() const;
  double min() const;
  /// Index of the largest score; ties resolve to the lowest index.
  int argmax() const;
};

struct LocalMaximum {
  int bin = 0;
  double score = 0.0;
};

struct AlignmentResult {
  int best_bin = 0;
  double best_degrees = 0.0;
  double ratio_confidence = 0.0;
  std::vector<LocalMaximum> local_maxima;  // ascending bin order
};

/// Reference implementation: the plain triple loop
///   S(i) = sum_k sum_h sum_w fg[w,h,k] * fs[(w+i) mod W_S, h, k].
/// Throws ShapeMismatch unless H_D and K_D agree and 0 < W_G <= W_S.
SimilarityVector sliding_similarity(const FeatureMap& fg, const FeatureMap& fs);

/// Same quantity computed as W_S contiguous dot products of length W_G*H_D*K_D
/// against a wrap-extended copy of fs, using the active SIMD kernels.
SimilarityVector sliding_similarity_fast(const FeatureMap& fg, const FeatureMap& fs);

/// Local maxima of a circular sequence. A maximal run of equal values counts
/// once, at its first bin, when both neighbours of the run are strictly
/// lower. A constant sequence has none.
std::vector<LocalMaximum> circular_local_maxima(std::span<const double> scores);

/// Arg-max plus ratio-test confidence 1 - s2'/s1', where s1' and s2' are the
/// two best local maxima after shifting the vector so its minimum is zero.
/// A single local maximum gives confidence 1, a constant vector 0.
AlignmentResult best_alignment(const SimilarityVector& s);

/// Arg-max restricted to bins within +-half_window_degrees of
/// center_degrees. The confidence compares the chosen score with the best
/// local maximum outside the window (1 when there is none), clamped to [0, 1].
AlignmentResult best_alignment_within(const SimilarityVector& s, double center_degrees, double half_window_degrees);

/// Columns [bin, bin + width) of fs with circular wrap. Throws BadWindow for
/// bin outside [0, W) or width outside [1, W].
FeatureMap shifted_reference_window(const FeatureMap& fs, int bin, int width);

/// out[i] = s[(i + k) mod n].
SimilarityVector circshift(const SimilarityVector& s, int k);

}  // namespace georeg
