#include "georeg/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "georeg/alignment.hpp"
#include "georeg/error.hpp"

namespace georeg {

namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

std::string trim(std::string s) {
  while (!s.empty() && (s.back() == '\r' || s.back() == ' ')) s.pop_back();
  std::size_t i = 0;
  while (i < s.size() && s[i] == ' ') ++i;
  return s.substr(i);
}

std::string key_of(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

}  // namespace

std::vector<DatasetRecord> read_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::Io, "cannot open manifest " + path.string());
  std::string line;
  if (!std::getline(in, line)) fail(ErrorCode::EmptySet, "manifest " + path.string() + " is empty");
  const auto header = split_csv(trim(line));
  const std::vector<std::string> expected{"ground_path", "ref_path", "lat", "lon", "heading", "split"};
  if (header.size() < 5 || !std::equal(header.begin(), header.begin() + 5, expected.begin()))
    fail(ErrorCode::InvalidArgument, "manifest header must start with ground_path,ref_path,lat,lon,heading");
  std::vector<DatasetRecord> out;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    line = trim(line);
    if (line.empty()) continue;
    const auto cells = split_csv(line);
    if (cells.size() != header.size())
      fail(ErrorCode::InvalidArgument, "manifest line " + std::to_string(lineno) + " has the wrong number of fields");
    DatasetRecord r;
    try {
      r.ground_path = cells[0];
      r.reference_path = cells[1];
      r.location = {std::stod(cells[2]), std::stod(cells[3])};
      r.heading_degrees = std::stod(cells[4]);
    } catch (const std::exception&) {
      fail(ErrorCode::InvalidArgument, "manifest line " + std::to_string(lineno) + " has a malformed number");
    }
    if (header.size() > 5) r.split = cells[5];
    if (!(r.heading_degrees >= 0.0 && r.heading_degrees < 360.0))
      fail(ErrorCode::InvalidArgument, "manifest line " + std::to_string(lineno) + ": heading outside [0, 360)");
    out.push_back(std::move(r));
  }
  return out;
}

void write_manifest(const std::filesystem::path& path, std::span<const DatasetRecord> records) {
  std::ofstream out(path);
  if (!out) fail(ErrorCode::Io, "cannot write manifest " + path.string());
  out << "ground_path,ref_path,lat,lon,heading,split\n";
  char buf[256];
  for (const auto& r : records) {
    std::snprintf(buf, sizeof buf, ",%.10f,%.10f,%.6f,", r.location.latitude, r.location.longitude, r.heading_degrees);
    out << r.ground_path << ',' << r.reference_path << buf << r.split << '\n';
  }
}

DistanceMatrix distance_matrix(std::span<const FeatureMap> queries, std::span<const FeatureMap> references) {
  DistanceMatrix d;
  d.queries = queries.size();
  d.references = references.size();
  d.values.resize(d.queries * d.references);
  for (std::size_t q = 0; q < d.queries; ++q)
    for (std::size_t r = 0; r < d.references; ++r) {
      const FeatureMap& g = queries[q];
      const FeatureMap& s = references[r];
      const int bin = sliding_similarity_fast(g, s).argmax();
      double sum = 0.0;
      for (int w = 0; w < g.width(); ++w) {
        const auto gc = g.column(w);
        const auto sc = s.column((bin + w) % s.width());
        for (std::size_t j = 0; j < gc.size(); ++j) sum += (gc[j] - sc[j]) * (gc[j] - sc[j]);
      }
      d.values[q * d.references + r] = std::sqrt(sum);
    }
  return d;
}

int rank_of(const DistanceMatrix& d, std::size_t query, std::size_t true_reference) {
  const double target = d.at(query, true_reference);
  int rank = 1;
  for (std::size_t r = 0; r < d.references; ++r) {
    const double v = d.at(query, r);
    if (v < target || (v == target && r < true_reference)) ++rank;
  }
  return rank;
}

std::map<int, double> recall_at_k(const DistanceMatrix& d, std::span<const std::size_t> true_pairing,
                                  std::span<const int> ks) {
  if (d.queries == 0 || d.references == 0) fail(ErrorCode::EmptySet, "recall needs queries and references");
  if (true_pairing.size() != d.queries) fail(ErrorCode::ShapeMismatch, "pairing length differs from query count");
  std::vector<int> ranks(d.queries);
  for (std::size_t q = 0; q < d.queries; ++q) {
    if (true_pairing[q] >= d.references) fail(ErrorCode::OutOfBounds, "pairing points past the reference set");
    ranks[q] = rank_of(d, q, true_pairing[q]);
  }
  std::map<int, double> out;
  for (int k : ks) {
    if (k < 1) fail(ErrorCode::InvalidArgument, "recall k must be positive");
    const int cap = std::min<int>(k, static_cast<int>(d.references));
    const auto hits = std::count_if(ranks.begin(), ranks.end(), [&](int r) { return r <= cap; });
    out[k] = static_cast<double>(hits) / static_cast<double>(d.queries);
  }
  return out;
}

std::map<int, double> recall_at_k(std::span<const FeatureMap> queries, std::span<const FeatureMap> references,
                                  std::span<const std::size_t> true_pairing, std::span<const int> ks) {
  if (queries.empty() || references.empty()) fail(ErrorCode::EmptySet, "recall needs queries and references");
  return recall_at_k(distance_matrix(queries, references), true_pairing, ks);
}

std::map<double, double> orientation_accuracy(std::span<const double> estimates, std::span<const double> truths,
                                              std::span<const double> thresholds) {
  if (estimates.empty()) fail(ErrorCode::EmptySet, "orientation accuracy needs estimates");
  if (estimates.size() != truths.size()) fail(ErrorCode::ShapeMismatch, "estimate and truth counts differ");
  std::map<double, double> out;
  for (double t : thresholds) {
    std::size_t hits = 0;
    for (std::size_t i = 0; i < estimates.size(); ++i)
      if (angular_error(estimates[i], truths[i]) <= t) ++hits;
    out[t] = static_cast<double>(hits) / static_cast<double>(estimates.size());
  }
  return out;
}

CoverageTable coverage_table(std::span<const double> coverage, std::span<const double> estimates,
                             std::span<const double> truths, std::span<const double> gates,
                             std::span<const double> thresholds) {
  if (coverage.size() != estimates.size() || estimates.size() != truths.size())
    fail(ErrorCode::ShapeMismatch, "coverage table inputs differ in length");
  CoverageTable t;
  t.gates.assign(gates.begin(), gates.end());
  t.thresholds.assign(thresholds.begin(), thresholds.end());
  for (double g : gates) {
    std::vector<double> row(thresholds.size(), 0.0);
    std::size_t n = 0;
    for (std::size_t i = 0; i < coverage.size(); ++i) {
      if (coverage[i] < g) continue;
      ++n;
      const double e = angular_error(estimates[i], truths[i]);
      for (std::size_t k = 0; k < thresholds.size(); ++k)
        if (e <= thresholds[k]) row[k] += 1.0;
    }
    if (n > 0)
      for (double& v : row) v /= static_cast<double>(n);
    t.accuracy.push_back(row);
    t.counts.push_back(n);
  }
  return t;
}

MetricsReport evaluate_pairs(std::span<const Image> ground, std::span<const Image> reference,
                             std::span<const double> headings, const FeatureExtractor& extractor,
                             const PairEvaluationOptions& options) {
  if (ground.empty()) fail(ErrorCode::EmptySet, "no pairs to evaluate");
  if (ground.size() != reference.size() || ground.size() != headings.size())
    fail(ErrorCode::ShapeMismatch, "pair lists differ in length");
  std::vector<FeatureMap> g, s;
  for (const auto& im : ground) g.push_back(ground_features(extractor, im, true));
  for (const auto& im : reference) s.push_back(reference_features(extractor, im));
  const DistanceMatrix d = distance_matrix(g, s);
  std::vector<std::size_t> pairing(g.size());
  for (std::size_t i = 0; i < pairing.size(); ++i) pairing[i] = i;

  MetricsReport report;
  report.recall_at = recall_at_k(d, pairing, options.ks);
  std::vector<double> est(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    const SimilarityVector sv = sliding_similarity_fast(g[i], s[i]);
    const int n = sv.size();
    const int bin = sv.argmax();
    est[i] = bin * sv.granularity_degrees();
    QueryRecord q;
    q.index = i;
    q.true_rank = rank_of(d, i, i);
    q.top_reference = static_cast<std::size_t>(
        std::min_element(d.values.begin() + static_cast<std::ptrdiff_t>(i * d.references),
                         d.values.begin() + static_cast<std::ptrdiff_t>((i + 1) * d.references)) -
        (d.values.begin() + static_cast<std::ptrdiff_t>(i * d.references)));
    q.heading_truth = headings[i];
    q.heading_estimate = est[i];
    q.heading_error = angular_error(est[i], headings[i]);
    const int gt = wrap_index(std::llround(wrap360(headings[i]) * n / 360.0), n);
    const int diff = std::abs(bin - gt);
    q.bin_error = std::min(diff, n - diff);
    report.per_query.push_back(q);
  }
  report.orientation_accuracy = orientation_accuracy(est, headings, options.thresholds);
  for (int k : options.bin_thresholds) {
    const auto hits = std::count_if(report.per_query.begin(), report.per_query.end(),
                                    [&](const QueryRecord& q) { return q.bin_error <= k; });
    report.orientation_accuracy_bins[k] = static_cast<double>(hits) / static_cast<double>(report.per_query.size());
  }
  return report;
}

nlohmann::json to_json(const MetricsReport& r) {
  nlohmann::json j;
  j["query_count"] = r.per_query.size();
  nlohmann::json recall = nlohmann::json::object();
  for (const auto& [k, v] : r.recall_at) recall[std::to_string(k)] = v;
  j["recall_at"] = recall;
  nlohmann::json acc = nlohmann::json::object();
  for (const auto& [k, v] : r.orientation_accuracy) acc[key_of(k)] = v;
  j["orientation_accuracy_degrees"] = acc;
  nlohmann::json accb = nlohmann::json::object();
  for (const auto& [k, v] : r.orientation_accuracy_bins) accb[std::to_string(k)] = v;
  j["orientation_accuracy_bins"] = accb;
  if (r.coverage) {
    nlohmann::json rows = nlohmann::json::array();
    for (std::size_t g = 0; g < r.coverage->gates.size(); ++g) {
      nlohmann::json row;
      row["coverage_gate"] = r.coverage->gates[g];
      row["frames"] = r.coverage->counts[g];
      nlohmann::json cells = nlohmann::json::object();
      for (std::size_t k = 0; k < r.coverage->thresholds.size(); ++k)
        cells[key_of(r.coverage->thresholds[k])] = r.coverage->accuracy[g][k];
      row["accuracy"] = cells;
      rows.push_back(row);
    }
    j["coverage_table"] = rows;
  }
  return j;
}

void write_report(const std::filesystem::path& dir, const MetricsReport& report) {
  std::filesystem::create_directories(dir);
  {
    std::ofstream out(dir / "metrics.json");
    if (!out) fail(ErrorCode::Io, "cannot write " + (dir / "metrics.json").string());
    out << to_json(report).dump(2) << '\n';
  }
  std::ofstream csv(dir / "per_query.csv");
  if (!csv) fail(ErrorCode::Io, "cannot write " + (dir / "per_query.csv").string());
  csv << "index,true_rank,top_reference,heading_truth,heading_estimate,heading_error,bin_error\n";
  char buf[160];
  for (const auto& q : report.per_query) {
    std::snprintf(buf, sizeof buf, "%zu,%d,%zu,%.6f,%.6f,%.6f,%d\n", q.index, q.true_rank, q.top_reference,
                  q.heading_truth, q.heading_estimate, q.heading_error, q.bin_error);
    csv << buf;
  }
}

std::string format_coverage_table(const CoverageTable& t) {
  std::ostringstream os;
  char buf[64];
  os << "coverage gate  frames";
  for (double th : t.thresholds) {
    std::snprintf(buf, sizeof buf, "  acc(%g)", th);
    os << buf;
  }
  os << '\n';
  for (std::size_t g = 0; g < t.gates.size(); ++g) {
    if (t.gates[g] <= 0.0)
      std::snprintf(buf, sizeof buf, "%13s  %6zu", "any", t.counts[g]);
    else
      std::snprintf(buf, sizeof buf, "%12g°  %6zu", t.gates[g], t.counts[g]);
    os << buf;
    for (double v : t.accuracy[g]) {
      std::snprintf(buf, sizeof buf, "  %7.3f", v);
      os << buf;
    }
    os << '\n';
  }
  return os.str();
}

}  // namespace georeg
