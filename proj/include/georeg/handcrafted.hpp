#pragma once

#include "georeg/feature_map.hpp"
#include "georeg/image.hpp"

namespace georeg {

struct HandcraftedConfig {
  int downsample = 8;         // cell side in pixels; feature width = image width / downsample
  int orientation_bins = 8;   // gradient-orientation histogram bins per cell
  double intensity_weight = 1.0;
  /// Scale each orientation column to unit L2 norm (HOG-style), so every
  /// window of a reference carries the same energy. All-zero columns stay zero.
  bool column_normalize = true;
};

/// Deterministic stand-in extractor: per cell, a magnitude-weighted histogram
/// of gradient orientations (linear soft binning) followed by the mean
/// intensity, giving orientation_bins + 1 channels.
///
/// With `circular_columns` the horizontal gradient wraps around the image
/// edge, which makes the output exactly equivariant to column shifts that are
/// multiples of `downsample` (use it for 360-degree imagery). Otherwise the
/// edge columns use one-sided differences.
///
/// Throws BadDimensions unless both image sides are positive multiples of
/// `downsample`.
FeatureMap extract_handcrafted(const Image& image, const HandcraftedConfig& config = {}, bool circular_columns = true);

}  // namespace georeg
