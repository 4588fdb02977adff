#include "georeg/location_search.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "georeg/error.hpp"

namespace georeg {

void validate(const SearchConfig& c) {
  if (!(c.region_east >= 0.0) || !(c.region_north >= 0.0)) fail(ErrorCode::InvalidArgument, "search region must be non-negative");
  if (!(c.spacing > 0.0)) fail(ErrorCode::InvalidArgument, "sample spacing must be positive");
  if (c.top_n < 1) fail(ErrorCode::InvalidArgument, "top_n must be at least 1");
  if (c.consistency_frames < 1) fail(ErrorCode::InvalidArgument, "consistency window must be at least 1 frame");
  if (!(c.threshold_fraction >= 0.0)) fail(ErrorCode::InvalidArgument, "threshold fraction must be non-negative");
}

namespace {

int samples_along(double region, double spacing) {
  return static_cast<int>(std::floor(region / spacing + 1e-9)) + 1;
}

}  // namespace

std::vector<GeoPoint> sample_grid(const GeoPoint& prior, const SearchConfig& c) {
  validate(c);
  const int ne = samples_along(c.region_east, c.spacing);
  const int nn = samples_along(c.region_north, c.spacing);
  std::vector<GeoPoint> out;
  out.reserve(static_cast<std::size_t>(ne) * nn);
  for (int r = 0; r < nn; ++r) {
    const double north = ((nn - 1) / 2.0 - r) * c.spacing;
    for (int col = 0; col < ne; ++col) {
      const double east = (col - (ne - 1) / 2.0) * c.spacing;
      out.push_back(from_local(prior, {east, north}));
    }
  }
  return out;
}

SearchResult search(std::span<const FrameObservation> frames, const GeoPoint& prior, const GeoRaster& world,
                    const FeatureExtractor& extractor, const GeometryConfig& geometry, const SearchConfig& c) {
  validate(c);
  const int fd = c.consistency_frames;
  if (frames.size() < static_cast<std::size_t>(fd))
    fail(ErrorCode::InvalidArgument, "search needs at least " + std::to_string(fd) + " frames");

  std::vector<FeatureMap> ground;
  ground.reserve(fd);
  for (int t = 0; t < fd; ++t) ground.push_back(ground_features(extractor, frames[t].image, false));

  bool stationary = true;
  for (int t = 1; t < fd; ++t)
    if (frames[t].translation_forward != 0.0 || frames[t].translation_right != 0.0) stationary = false;

  auto reference_at = [&](const GeoPoint& p) {
    return reference_features(extractor, reference_polar(world, p, geometry).pixels);
  };

  SearchResult result;
  const std::vector<GeoPoint> grid = sample_grid(prior, c);
  result.grid_size = grid.size();
  std::vector<LocationHypothesis> scored;
  scored.reserve(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    FeatureMap ref;
    try {
      ref = reference_at(grid[i]);
    } catch (const Error& e) {
      if (e.code() == ErrorCode::OutOfBounds) continue;  // tile leaves the world
      throw;
    }
    const SimilarityVector s = sliding_similarity_fast(ground[0], ref);
    LocationHypothesis h;
    h.location = grid[i];
    h.grid_index = i;
    h.frame0_score = s.max();
    h.best_bin = s.argmax();
    scored.push_back(h);
  }
  if (scored.empty()) fail(ErrorCode::NoConsistentHypothesis, "no grid sample lies inside the world raster");
  std::stable_sort(scored.begin(), scored.end(), [](const LocationHypothesis& a, const LocationHypothesis& b) {
    return a.frame0_score > b.frame0_score;
  });
  if (scored.size() > static_cast<std::size_t>(c.top_n)) scored.resize(c.top_n);
  result.threshold = c.similarity_threshold ? *c.similarity_threshold : c.threshold_fraction * scored.front().frame0_score;

  // Dummy orientations along the window; frame 0 is the reference.
  std::vector<double> y(fd, 0.0);
  for (int t = 1; t < fd; ++t) y[t] = track_dummy_orientation(y[t - 1], frames[t].heading_delta);

  for (auto& h : scored) {
    std::vector<BufferEntry> entries;
    entries.reserve(fd);
    FeatureMap ref = reference_at(h.location);
    const int ws = ref.width();
    const double h0 = deg2rad(h.best_bin * 360.0 / ws);
    EastNorth offset{0.0, 0.0};
    bool ok = true;
    double total = 0.0;
    for (int t = 0; t < fd; ++t) {
      if (!stationary && t > 0) {
        const double f = frames[t].translation_forward;
        const double r = frames[t].translation_right;
        offset.east += f * std::sin(h0) + r * std::cos(h0);
        offset.north += f * std::cos(h0) - r * std::sin(h0);
        try {
          ref = reference_at(from_local(h.location, offset));
        } catch (const Error& e) {
          if (e.code() != ErrorCode::OutOfBounds) throw;
          ok = false;
          break;
        }
      }
      SimilarityVector s = sliding_similarity_fast(ground[t], ref);
      const double m = s.max();
      if (!(m > result.threshold)) ok = false;
      total += m;
      entries.push_back({std::move(s), y[t], static_cast<double>(t)});
    }
    h.consistent = ok;
    h.score = total;
    if (ok) {
      const SimilarityVector acc = accumulate(std::span<const BufferEntry>(entries), 0.0);
      h.heading_degrees = acc.argmax() * acc.granularity_degrees();
    } else {
      h.heading_degrees = h.best_bin * 360.0 / ws;
    }
  }
  result.candidates = scored;

  const LocationHypothesis* best = nullptr;
  for (const auto& h : scored) {
    if (!h.consistent) continue;
    if (!best || h.score > best->score || (h.score == best->score && h.grid_index < best->grid_index)) best = &h;
  }
  if (!best) fail(ErrorCode::NoConsistentHypothesis, "all top-N candidates failed the consistency check");
  result.best = *best;
  return result;
}

}  // namespace georeg
