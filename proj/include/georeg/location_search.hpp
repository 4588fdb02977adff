#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "georeg/extractor.hpp"
#include "georeg/geo.hpp"
#include "georeg/imaging_geometry.hpp"
#include "georeg/raster.hpp"
#include "georeg/sequencer.hpp"

namespace georeg {

struct SearchConfig {
  double region_east = 100.0;   // meters, full width of the search box
  double region_north = 100.0;  // meters, full height
  double spacing = 2.0;         // x_s
  int top_n = 25;               // N
  int consistency_frames = 20;  // f_d
  /// Per-frame consistency threshold as a fraction of the best frame-0
  /// score, unless an absolute threshold is given.
  double threshold_fraction = 0.7;
  std::optional<double> similarity_threshold;
};

void validate(const SearchConfig& config);

struct LocationHypothesis {
  GeoPoint location;
  std::size_t grid_index = 0;  // row-major, north row first
  double frame0_score = 0.0;
  double score = 0.0;    // sum of per-frame maxima over the consistency window
  int best_bin = 0;      // frame-0 arg-max
  double heading_degrees = 0.0;  // frame-0 heading from the accumulated window
  bool consistent = false;
};

struct SearchResult {
  LocationHypothesis best;
  std::vector<LocationHypothesis> candidates;  // the top-N survivors in frame-0 rank order
  std::size_t grid_size = 0;
  double threshold = 0.0;
};

/// Regular grid centered on the prior with floor(region / spacing) + 1
/// samples per axis, ordered row-major from the north-west corner.
std::vector<GeoPoint> sample_grid(const GeoPoint& prior, const SearchConfig& config);

/// Joint location and heading search. Uses the first f_d frames. Throws
/// InvalidArgument for too few frames and NoConsistentHypothesis when every
/// survivor fails the consistency check.
SearchResult search(std::span<const FrameObservation> frames, const GeoPoint& prior, const GeoRaster& world,
                    const FeatureExtractor& extractor, const GeometryConfig& geometry, const SearchConfig& config);

}  // namespace georeg
