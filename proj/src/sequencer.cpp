#include "georeg/sequencer.hpp"

#include <algorithm>
#include <cmath>
#include <utility>
#include <vector>

#include "georeg/error.hpp"

namespace georeg {

void validate(const SequencerConfig& c) {
  if (!(c.tau_seconds >= 0.0)) fail(ErrorCode::InvalidArgument, "tau must be non-negative");
  if (c.max_frames < 0) fail(ErrorCode::InvalidArgument, "max_frames must be non-negative");
  if (!(c.fov_threshold >= 0.0 && c.fov_threshold <= 360.0))
    fail(ErrorCode::InvalidArgument, "fov threshold must lie in [0, 360]");
  if (!(c.ratio_threshold >= 0.0 && c.ratio_threshold <= 1.0))
    fail(ErrorCode::InvalidArgument, "ratio threshold must lie in [0, 1]");
  if (!(c.camera_fov > 0.0 && c.camera_fov <= 360.0)) fail(ErrorCode::InvalidFov, "camera fov must lie in (0, 360]");
  if (!(c.refine_window > 0.0 && c.refine_window <= 180.0))
    fail(ErrorCode::InvalidArgument, "refine window must lie in (0, 180]");
}

const char* to_string(SequencerMode mode) noexcept { return mode == SequencerMode::Refine ? "refine" : "cold-start"; }

SequencerMode parse_sequencer_mode(const std::string& name) {
  if (name == "cold-start" || name == "coldstart") return SequencerMode::ColdStart;
  if (name == "refine") return SequencerMode::Refine;
  fail(ErrorCode::InvalidArgument, "unknown sequencer mode '" + name + "'");
}

double track_dummy_orientation(double prev_y, double delta) { return wrap360(prev_y + delta); }

SimilarityVector accumulate(std::span<const BufferEntry> buffer, double current_y) {
  if (buffer.empty()) fail(ErrorCode::EmptySet, "cannot accumulate an empty buffer");
  const int n = buffer.front().similarity.size();
  SimilarityVector out{std::vector<double>(n, 0.0)};
  for (const auto& e : buffer) {
    if (e.similarity.size() != n) fail(ErrorCode::MixedGranularity, "buffered similarity vectors differ in length");
    const long long shift = std::llround((current_y - e.dummy_orientation) * n / 360.0);
    for (int i = 0; i < n; ++i) out.scores[i] += e.similarity.scores[wrap_index(i - shift, n)];
  }
  return out;
}

SimilarityVector accumulate(const std::deque<BufferEntry>& buffer, double current_y) {
  const std::vector<BufferEntry> v(buffer.begin(), buffer.end());
  return accumulate(std::span<const BufferEntry>(v), current_y);
}

double fov_coverage(std::span<const BufferEntry> buffer, double camera_fov) {
  if (buffer.empty()) return 0.0;
  if (camera_fov >= 360.0) return 360.0;
  std::vector<std::pair<double, double>> arcs;
  for (const auto& e : buffer) {
    const double lo = wrap360(e.dummy_orientation - camera_fov / 2.0);
    const double hi = lo + camera_fov;
    if (hi <= 360.0) {
      arcs.emplace_back(lo, hi);
    } else {
      arcs.emplace_back(lo, 360.0);
      arcs.emplace_back(0.0, hi - 360.0);
    }
  }
  std::sort(arcs.begin(), arcs.end());
  double total = 0.0;
  double cur_lo = arcs.front().first, cur_hi = arcs.front().second;
  for (std::size_t i = 1; i < arcs.size(); ++i) {
    if (arcs[i].first <= cur_hi) {
      cur_hi = std::max(cur_hi, arcs[i].second);
    } else {
      total += cur_hi - cur_lo;
      cur_lo = arcs[i].first;
      cur_hi = arcs[i].second;
    }
  }
  total += cur_hi - cur_lo;
  return std::min(total, 360.0);
}

double fov_coverage(const std::deque<BufferEntry>& buffer, double camera_fov) {
  const std::vector<BufferEntry> v(buffer.begin(), buffer.end());
  return fov_coverage(std::span<const BufferEntry>(v), camera_fov);
}

SequenceAccumulator::SequenceAccumulator(SequencerConfig config) : config_(config) { validate(config_); }

void SequenceAccumulator::reset() {
  buffer_.clear();
  y_ = 0.0;
  frames_ = 0;
}

HeadingEstimate SequenceAccumulator::evaluate(const SimilarityVector& accumulated, double coverage,
                                              std::optional<double> heading_prior, double timestamp) const {
  HeadingEstimate est;
  est.mode = config_.mode;
  est.fov_coverage_degrees = coverage;
  est.timestamp = timestamp;
  AlignmentResult r;
  if (config_.mode == SequencerMode::Refine) {
    if (!heading_prior) fail(ErrorCode::MissingPrior, "refine mode needs a navigation heading prior");
    r = best_alignment_within(accumulated, *heading_prior, config_.refine_window);
    est.accepted = r.ratio_confidence >= config_.ratio_threshold;
  } else {
    r = best_alignment(accumulated);
    est.accepted = r.ratio_confidence >= config_.ratio_threshold && coverage >= config_.fov_threshold;
  }
  est.best_bin = r.best_bin;
  est.heading_degrees = r.best_degrees;
  est.ratio_confidence = r.ratio_confidence;
  return est;
}

HeadingEstimate SequenceAccumulator::push(const SimilarityVector& similarity, double heading_delta, double timestamp,
                                          std::optional<double> heading_prior) {
  if (!std::isfinite(heading_delta)) fail(ErrorCode::InvalidArgument, "heading delta must be finite");
  if (!std::isfinite(timestamp)) fail(ErrorCode::InvalidArgument, "timestamp must be finite");
  if (!buffer_.empty() && timestamp <= buffer_.back().timestamp)
    fail(ErrorCode::InvalidArgument, "timestamps must be strictly increasing");
  if (similarity.size() == 0) fail(ErrorCode::EmptySet, "empty similarity vector");
  if (!buffer_.empty() && buffer_.front().similarity.size() != similarity.size())
    fail(ErrorCode::MixedGranularity, "similarity granularity changed mid-sequence");
  if (config_.mode == SequencerMode::Refine && !heading_prior)
    fail(ErrorCode::MissingPrior, "refine mode needs a navigation heading prior");

  // Work on a copy so a failure below leaves the state as it was.
  std::deque<BufferEntry> next = buffer_;
  const double y = frames_ == 0 ? 0.0 : track_dummy_orientation(y_, heading_delta);
  next.push_back({similarity, y, timestamp});
  while (timestamp - next.front().timestamp > config_.tau_seconds) next.pop_front();
  if (config_.max_frames > 0)
    while (next.size() > static_cast<std::size_t>(config_.max_frames)) next.pop_front();

  const SimilarityVector acc = accumulate(next, y);
  const HeadingEstimate est = evaluate(acc, fov_coverage(next, config_.camera_fov), heading_prior, timestamp);

  buffer_ = std::move(next);
  y_ = y;
  ++frames_;
  return est;
}

Sequencer::Sequencer(const GeoRaster& world, const FeatureExtractor& extractor, GeometryConfig geometry,
                     SequencerConfig config)
    : world_(world), extractor_(extractor), geometry_(geometry), acc_(config) {}

const FeatureMap& Sequencer::reference_at(const GeoPoint& position) {
  if (!cached_position_ || !(*cached_position_ == position)) {
    FeatureMap f = reference_features(extractor_, reference_polar(world_, position, geometry_).pixels);
    cached_reference_ = std::move(f);
    cached_position_ = position;
  }
  return cached_reference_;
}

SimilarityVector Sequencer::frame_similarity(const FrameObservation& frame) {
  const bool full = frame.image.width() == geometry_.polar_width && acc_.config().camera_fov >= 360.0;
  const FeatureMap g = ground_features(extractor_, frame.image, full);
  return sliding_similarity_fast(g, reference_at(frame.global_position));
}

HeadingEstimate Sequencer::step(const FrameObservation& frame) {
  return acc_.push(frame_similarity(frame), frame.heading_delta, frame.timestamp, frame.heading_prior);
}

}  // namespace georeg
