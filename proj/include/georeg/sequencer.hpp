#pragma once

#include <deque>
#include <optional>
#include <span>
#include <string>

#include "georeg/alignment.hpp"
#include "georeg/extractor.hpp"
#include "georeg/geo.hpp"
#include "georeg/image.hpp"
#include "georeg/imaging_geometry.hpp"
#include "georeg/raster.hpp"

namespace georeg {

/// One camera frame plus the navigation quantities that come with it.
struct FrameObservation {
  Image image;
  GeoPoint global_position;
  double heading_delta = 0.0;  // degrees since the previous frame, from odometry
  /// Displacement since the previous frame in the odometry frame (meters,
  /// axes aligned with dummy orientation 0: forward, then right).
  double translation_forward = 0.0;
  double translation_right = 0.0;
  double timestamp = 0.0;
  /// Navigation heading used as the refine-mode prior.
  std::optional<double> heading_prior;
};

struct BufferEntry {
  SimilarityVector similarity;
  double dummy_orientation = 0.0;  // [0, 360)
  double timestamp = 0.0;
};

enum class SequencerMode { ColdStart, Refine };

struct HeadingEstimate {
  double heading_degrees = 0.0;
  double ratio_confidence = 0.0;
  double fov_coverage_degrees = 0.0;
  bool accepted = false;
  SequencerMode mode = SequencerMode::ColdStart;
  int best_bin = 0;
  double timestamp = 0.0;
};

struct SequencerConfig {
  double tau_seconds = 10.0;     // buffer horizon
  int max_frames = 0;            // optional frame-count horizon, 0 = unlimited
  double fov_threshold = 120.0;  // coverage gate, degrees
  double ratio_threshold = 0.3;  // confidence gate
  double camera_fov = 69.0;
  double refine_window = 6.0;  // +- degrees around the prior
  SequencerMode mode = SequencerMode::ColdStart;
};

void validate(const SequencerConfig& config);
const char* to_string(SequencerMode mode) noexcept;
SequencerMode parse_sequencer_mode(const std::string& name);

/// (prev_y + delta) wrapped to [0, 360).
double track_dummy_orientation(double prev_y, double delta);

/// Sum of buffered vectors, each rotated so its peak lands where the
/// current frame would see it: entry t contributes
/// circshift(S_t, -round((current_y - y_t) * W_S / 360)).
/// Throws EmptySet on an empty buffer and MixedGranularity on length mismatch.
SimilarityVector accumulate(std::span<const BufferEntry> buffer, double current_y);
SimilarityVector accumulate(const std::deque<BufferEntry>& buffer, double current_y);

/// Measure of the union of arcs [y_t - fov/2, y_t + fov/2], at most 360.
double fov_coverage(std::span<const BufferEntry> buffer, double camera_fov);
double fov_coverage(const std::deque<BufferEntry>& buffer, double camera_fov);

/// Buffer, dummy orientation and gating, fed with per-frame similarity
/// vectors. Independent of how the vectors were produced.
class SequenceAccumulator {
 public:
  explicit SequenceAccumulator(SequencerConfig config);

  /// Inserts one frame. On error the state is left untouched.
  HeadingEstimate push(const SimilarityVector& similarity, double heading_delta, double timestamp,
                       std::optional<double> heading_prior = std::nullopt);

  const std::deque<BufferEntry>& buffer() const noexcept { return buffer_; }
  double dummy_orientation() const noexcept { return y_; }
  std::size_t frames_seen() const noexcept { return frames_; }
  const SequencerConfig& config() const noexcept { return config_; }
  void reset();

  /// Estimate from a similarity vector already in the current frame's reference.
  HeadingEstimate evaluate(const SimilarityVector& accumulated, double coverage,
                           std::optional<double> heading_prior, double timestamp) const;

 private:
  SequencerConfig config_;
  std::deque<BufferEntry> buffer_;
  double y_ = 0.0;
  std::size_t frames_ = 0;
};

/// Full per-frame pipeline: crop, polar transform, extract, correlate, then
/// buffer and gate. Reference features are cached per position.
class Sequencer {
 public:
  Sequencer(const GeoRaster& world, const FeatureExtractor& extractor, GeometryConfig geometry, SequencerConfig config);

  HeadingEstimate step(const FrameObservation& frame);
  /// Similarity of one frame against the reference at its global position.
  SimilarityVector frame_similarity(const FrameObservation& frame);

  const SequenceAccumulator& state() const noexcept { return acc_; }
  void reset() { acc_.reset(); }

 private:
  const FeatureMap& reference_at(const GeoPoint& position);

  const GeoRaster& world_;
  const FeatureExtractor& extractor_;
  GeometryConfig geometry_;
  SequenceAccumulator acc_;
  std::optional<GeoPoint> cached_position_;
  FeatureMap cached_reference_;
};

}  // namespace georeg
