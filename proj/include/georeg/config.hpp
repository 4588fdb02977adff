#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

#include "georeg/handcrafted.hpp"
#include "georeg/heading_fusion.hpp"
#include "georeg/imaging_geometry.hpp"
#include "georeg/learned_extractor.hpp"
#include "georeg/location_search.hpp"
#include "georeg/objective.hpp"
#include "georeg/sequencer.hpp"
#include "georeg/synthetic_world.hpp"
#include "georeg/training.hpp"

namespace georeg {

struct ExtractorSelection {
  std::string kind = "handcrafted";  // "handcrafted" or "learned"
  HandcraftedConfig handcrafted{4, 8, 1.0};
  ExtractorConfig ground;
  ExtractorConfig reference;
  bool shared_weights = false;
  std::string checkpoint;  // learned weights; empty means freshly initialized
};

struct EvalConfig {
  std::vector<int> recall_ks{1, 5, 10};
  std::vector<double> orientation_thresholds{2.0, 4.0, 6.0, 12.0};
  std::vector<double> coverage_gates{0.0, 120.0, 180.0};
  std::vector<double> table_thresholds{2.0, 5.0, 10.0};
  double test_fraction = 0.2;
};

/// Everything one run needs, loaded from a single JSON file. Missing keys
/// keep their defaults; unknown keys are rejected.
struct RunConfig {
  WorldSpec world;
  GeometryConfig geometry{kDefaultCoverageMeters, 0, 256, 64};
  TrajectorySpec trajectory;
  PairSpec pairs;
  ExtractorSelection extractor;
  LossConfig loss;
  OptimizerConfig optimizer;
  SequencerConfig sequencer;
  SearchConfig search;
  FusionState fusion;
  EvalConfig eval;
};

nlohmann::json to_json(const WorldSpec& v);
nlohmann::json to_json(const GeometryConfig& v);
nlohmann::json to_json(const TrajectorySpec& v);
nlohmann::json to_json(const PairSpec& v);
nlohmann::json to_json(const HandcraftedConfig& v);
nlohmann::json to_json(const ExtractorConfig& v);
nlohmann::json to_json(const ExtractorSelection& v);
nlohmann::json to_json(const LossConfig& v);
nlohmann::json to_json(const OptimizerConfig& v);
nlohmann::json to_json(const SequencerConfig& v);
nlohmann::json to_json(const SearchConfig& v);
nlohmann::json to_json(const FusionState& v);
nlohmann::json to_json(const EvalConfig& v);
nlohmann::json to_json(const RunConfig& v);

ExtractorConfig extractor_config_from_json(const nlohmann::json& j);
RunConfig run_config_from_json(const nlohmann::json& j);

/// Throws Io for unreadable files and InvalidArgument for schema errors.
RunConfig load_run_config(const std::filesystem::path& path);
void validate(const RunConfig& config);

}  // namespace georeg
