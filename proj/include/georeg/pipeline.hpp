#pragma once

#include <filesystem>
#include <iosfwd>
#include <memory>
#include <optional>
#include <vector>

#include "json.hpp"

#include "georeg/config.hpp"
#include "georeg/evaluation.hpp"
#include "georeg/extractor.hpp"
#include "georeg/synthetic_world.hpp"
#include "georeg/training.hpp"

// Runnable experiments over a data directory laid out by run_simgen:
//   world.pgm + world.json      geo-referenced aerial raster
//   trajectory.jsonl, frames/   camera frames with odometry and truth
//   manifest.csv, pairs/        ground/reference pairs with a train/test split

namespace georeg {

struct SimgenSummary {
  std::size_t frames = 0;
  std::size_t pairs = 0;
  std::size_t test_pairs = 0;
};

SimgenSummary run_simgen(const RunConfig& config, const std::filesystem::path& out_dir);

/// Frame plus the ground truth stored next to it in trajectory.jsonl.
std::vector<TrajectoryFrame> load_trajectory(const std::filesystem::path& jsonl);

/// Record for one frame: image path, lat, lon, heading_delta, timestamp and
/// optional odometry translation, heading prior and truth fields.
nlohmann::json frame_to_json(const TrajectoryFrame& frame, std::size_t index, const std::string& image_path);
FrameObservation frame_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir);
nlohmann::json to_json(const HeadingEstimate& estimate);

std::unique_ptr<FeatureExtractor> make_extractor(const RunConfig& config,
                                                 const std::optional<std::filesystem::path>& checkpoint = {});

/// Paired samples from the manifest rows with the given split tag.
std::vector<PairSample> load_pairs(const std::filesystem::path& data_dir, const std::string& split, int feature_width,
                                   std::vector<double>* headings = nullptr);

/// Trains on the train split; writes per-epoch checkpoints, model.json and
/// loss_curve.csv into out_dir.
TrainingReport run_train(const RunConfig& config, const std::filesystem::path& data_dir,
                         const std::filesystem::path& out_dir);

/// Retrieval and orientation metrics on the test split, plus the coverage
/// table over the trajectory. Writes metrics.json and per_query.csv.
MetricsReport run_eval(const RunConfig& config, const std::filesystem::path& data_dir,
                       const std::filesystem::path& out_dir,
                       const std::optional<std::filesystem::path>& checkpoint = {});

/// Cold-start (or refine) heading over the stored trajectory; one estimate
/// per frame.
std::vector<HeadingEstimate> run_coldstart(const RunConfig& config, const std::filesystem::path& data_dir,
                                           const FeatureExtractor& extractor);

/// Joint location and heading search; the prior is the first frame's
/// reported position.
SearchResult run_location_search(const RunConfig& config, const std::filesystem::path& data_dir,
                                 const FeatureExtractor& extractor);
nlohmann::json to_json(const SearchResult& result);

/// JSON-lines in, JSON-lines out. Each output line is a heading estimate,
/// with the fused heading appended when `fuse` is set. Malformed lines
/// produce an {"error": ...} record and do not touch the sequencer state.
void run_stream(const RunConfig& config, const GeoRaster& world, const FeatureExtractor& extractor, std::istream& in,
                std::ostream& out, const std::filesystem::path& base_dir, bool fuse);

}  // namespace georeg
