#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "georeg/extractor.hpp"
#include "georeg/feature_map.hpp"
#include "georeg/geo.hpp"

namespace georeg {

/// One manifest row. Paths are relative to the manifest's directory.
struct DatasetRecord {
  std::string ground_path;
  std::string reference_path;
  GeoPoint location;
  double heading_degrees = 0.0;
  std::string split = "train";
};

/// CSV with header ground_path,ref_path,lat,lon,heading,split.
std::vector<DatasetRecord> read_manifest(const std::filesystem::path& path);
void write_manifest(const std::filesystem::path& path, std::span<const DatasetRecord> records);

/// Row-major query x reference distances.
struct DistanceMatrix {
  std::size_t queries = 0;
  std::size_t references = 0;
  std::vector<double> values;
  double at(std::size_t q, std::size_t r) const { return values[q * references + r]; }
};

/// Frobenius distance at the best alignment bin for every (query, reference).
DistanceMatrix distance_matrix(std::span<const FeatureMap> queries, std::span<const FeatureMap> references);

/// 1 + number of references closer than the true one, counting equal
/// distances at lower indices as closer.
int rank_of(const DistanceMatrix& d, std::size_t query, std::size_t true_reference);

/// Fraction of queries whose true reference ranks <= k (k capped at the
/// reference count). Throws EmptySet without queries.
std::map<int, double> recall_at_k(const DistanceMatrix& d, std::span<const std::size_t> true_pairing,
                                  std::span<const int> ks);
std::map<int, double> recall_at_k(std::span<const FeatureMap> queries, std::span<const FeatureMap> references,
                                  std::span<const std::size_t> true_pairing, std::span<const int> ks);

/// Fraction of wrapped absolute errors <= each threshold (degrees).
std::map<double, double> orientation_accuracy(std::span<const double> estimates, std::span<const double> truths,
                                              std::span<const double> thresholds);

struct QueryRecord {
  std::size_t index = 0;
  int true_rank = 0;
  std::size_t top_reference = 0;
  double heading_truth = 0.0;
  double heading_estimate = 0.0;
  double heading_error = 0.0;
  int bin_error = 0;
};

/// Accuracy of heading estimates restricted to frames whose coverage
/// reaches each gate, one row per gate and one column per error threshold.
struct CoverageTable {
  std::vector<double> gates;
  std::vector<double> thresholds;
  std::vector<std::vector<double>> accuracy;  // [gate][threshold]
  std::vector<std::size_t> counts;            // frames per gate
};

CoverageTable coverage_table(std::span<const double> coverage, std::span<const double> estimates,
                             std::span<const double> truths, std::span<const double> gates,
                             std::span<const double> thresholds);

struct MetricsReport {
  std::map<int, double> recall_at;
  std::map<double, double> orientation_accuracy;
  std::map<int, double> orientation_accuracy_bins;  // within +-k bins
  std::vector<QueryRecord> per_query;
  std::optional<CoverageTable> coverage;
};

struct PairEvaluationOptions {
  std::vector<int> ks{1, 5, 10};
  std::vector<double> thresholds{2.0, 4.0, 6.0, 12.0};
  std::vector<int> bin_thresholds{1, 2};
};

/// Retrieval and orientation metrics for matched ground/reference images
/// (query i pairs with reference i). Orientation comes from the arg-max
/// against the true reference.
MetricsReport evaluate_pairs(std::span<const Image> ground, std::span<const Image> reference,
                             std::span<const double> headings, const FeatureExtractor& extractor,
                             const PairEvaluationOptions& options);

nlohmann::json to_json(const MetricsReport& report);
/// metrics.json (stable key order, fixed precision) and per_query.csv.
void write_report(const std::filesystem::path& dir, const MetricsReport& report);
std::string format_coverage_table(const CoverageTable& table);

}  // namespace georeg
