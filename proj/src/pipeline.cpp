#include "georeg/pipeline.hpp"

#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>

#include "georeg/error.hpp"
#include "georeg/heading_fusion.hpp"
#include "georeg/location_search.hpp"
#include "georeg/raster.hpp"
#include "georeg/sequencer.hpp"

namespace georeg {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

std::string numbered(const char* pattern, std::size_t i) {
  char buf[64];
  std::snprintf(buf, sizeof buf, pattern, i);
  return buf;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) fail(ErrorCode::Io, "cannot write " + path.string());
  out << text;
  if (!out) fail(ErrorCode::Io, "failed writing " + path.string());
}

GeoRaster load_world(const fs::path& data_dir) {
  GeoRaster world = load_geo_raster(data_dir / "world.pgm");
  if (!world.georef) fail(ErrorCode::MissingGeoreference, "world.pgm has no georeference sidecar");
  return world;
}

}  // namespace

json frame_to_json(const TrajectoryFrame& f, std::size_t index, const std::string& image_path) {
  const auto& o = f.observation;
  json j;
  j["frame"] = index;
  j["image"] = image_path;
  j["lat"] = o.global_position.latitude;
  j["lon"] = o.global_position.longitude;
  j["heading_delta"] = o.heading_delta;
  j["translation_forward"] = o.translation_forward;
  j["translation_right"] = o.translation_right;
  j["timestamp"] = o.timestamp;
  if (o.heading_prior) j["heading_prior"] = *o.heading_prior;
  j["truth_lat"] = f.truth.position.latitude;
  j["truth_lon"] = f.truth.position.longitude;
  j["truth_heading"] = f.truth.heading_degrees;
  return j;
}

FrameObservation frame_from_json(const json& j, const fs::path& base_dir) {
  FrameObservation o;
  try {
    fs::path image = j.at("image").get<std::string>();
    if (image.is_relative()) image = base_dir / image;
    o.image = read_pgm(image);
    o.global_position = {j.at("lat").get<double>(), j.at("lon").get<double>()};
    o.heading_delta = j.value("heading_delta", 0.0);
    o.translation_forward = j.value("translation_forward", 0.0);
    o.translation_right = j.value("translation_right", 0.0);
    o.timestamp = j.at("timestamp").get<double>();
    if (j.contains("heading_prior") && !j["heading_prior"].is_null()) o.heading_prior = j["heading_prior"].get<double>();
  } catch (const json::exception& e) {
    fail(ErrorCode::InvalidArgument, std::string("malformed frame record: ") + e.what());
  }
  if (!is_valid(o.global_position)) fail(ErrorCode::InvalidArgument, "frame record has an invalid position");
  return o;
}

json to_json(const HeadingEstimate& e) {
  return {{"timestamp", e.timestamp},
          {"heading_degrees", e.heading_degrees},
          {"best_bin", e.best_bin},
          {"ratio_confidence", e.ratio_confidence},
          {"fov_coverage_degrees", e.fov_coverage_degrees},
          {"accepted", e.accepted},
          {"mode", to_string(e.mode)}};
}

std::vector<TrajectoryFrame> load_trajectory(const fs::path& jsonl) {
  std::ifstream in(jsonl);
  if (!in) fail(ErrorCode::Io, "cannot open " + jsonl.string());
  std::vector<TrajectoryFrame> frames;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      fail(ErrorCode::InvalidArgument, jsonl.string() + ": " + e.what());
    }
    TrajectoryFrame f;
    f.observation = frame_from_json(j, jsonl.parent_path());
    f.truth.position = {j.value("truth_lat", f.observation.global_position.latitude),
                        j.value("truth_lon", f.observation.global_position.longitude)};
    f.truth.heading_degrees = j.value("truth_heading", 0.0);
    frames.push_back(std::move(f));
  }
  return frames;
}

SimgenSummary run_simgen(const RunConfig& config, const fs::path& out_dir) {
  validate(config);
  fs::create_directories(out_dir / "frames");
  fs::create_directories(out_dir / "pairs");
  const GeoRaster world = generate_world(config.world);
  save_geo_raster(out_dir / "world.pgm", world);

  SimgenSummary summary;
  auto frames = generate_trajectory(world, config.trajectory, config.geometry);
  // Navigation prior: truth at the first frame, then odometry only.
  double prior = frames.empty() ? 0.0 : frames.front().truth.heading_degrees;
  std::string lines;
  for (std::size_t i = 0; i < frames.size(); ++i) {
    if (i > 0) prior = wrap360(prior + frames[i].observation.heading_delta);
    frames[i].observation.heading_prior = prior;
    const std::string rel = "frames/" + numbered("%06zu.pgm", i);
    write_pgm(out_dir / rel, frames[i].observation.image);
    lines += frame_to_json(frames[i], i, rel).dump() + "\n";
  }
  write_text(out_dir / "trajectory.jsonl", lines);
  summary.frames = frames.size();

  const auto pairs = generate_pairs(world, config.pairs, config.geometry);
  const std::size_t n_test = static_cast<std::size_t>(std::llround(pairs.size() * config.eval.test_fraction));
  std::vector<DatasetRecord> records;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    DatasetRecord r;
    r.ground_path = "pairs/" + numbered("ground_%05zu.pgm", i);
    r.reference_path = "pairs/" + numbered("ref_%05zu.pgm", i);
    write_pgm(out_dir / r.ground_path, pairs[i].ground);
    write_pgm(out_dir / r.reference_path, pairs[i].reference);
    r.location = pairs[i].location;
    r.heading_degrees = pairs[i].heading_degrees;
    r.split = i + n_test >= pairs.size() ? "test" : "train";
    records.push_back(std::move(r));
  }
  write_manifest(out_dir / "manifest.csv", records);
  summary.pairs = pairs.size();
  summary.test_pairs = n_test;
  write_text(out_dir / "config.json", to_json(config).dump(2) + "\n");
  return summary;
}

std::unique_ptr<FeatureExtractor> make_extractor(const RunConfig& config, const std::optional<fs::path>& checkpoint) {
  const auto& sel = config.extractor;
  // An explicit checkpoint always means the learned extractor.
  if (sel.kind == "handcrafted" && !checkpoint) return std::make_unique<HandcraftedExtractor>(sel.handcrafted);
  std::optional<fs::path> path = checkpoint;
  if (!path && !sel.checkpoint.empty()) path = sel.checkpoint;
  TwoBranchModel model = path ? load_checkpoint(*path, sel.ground, sel.reference, sel.shared_weights)
                              : make_model(sel.ground, sel.reference, sel.shared_weights);
  return std::make_unique<LearnedExtractor>(std::move(model));
}

std::vector<PairSample> load_pairs(const fs::path& data_dir, const std::string& split, int feature_width,
                                   std::vector<double>* headings) {
  const auto records = read_manifest(data_dir / "manifest.csv");
  std::vector<PairSample> out;
  for (const auto& r : records) {
    if (r.split != split) continue;
    PairSample s;
    s.ground = read_pgm(data_dir / r.ground_path);
    s.reference = read_pgm(data_dir / r.reference_path);
    s.gt_bin = heading_to_bin(r.heading_degrees, feature_width);
    out.push_back(std::move(s));
    if (headings) headings->push_back(r.heading_degrees);
  }
  if (out.empty()) fail(ErrorCode::EmptySet, "manifest has no '" + split + "' pairs");
  return out;
}

TrainingReport run_train(const RunConfig& config, const fs::path& data_dir, const fs::path& out_dir) {
  validate(config);
  const auto& sel = config.extractor;
  TwoBranchModel model = sel.checkpoint.empty()
                             ? make_model(sel.ground, sel.reference, sel.shared_weights)
                             : load_checkpoint(sel.checkpoint, sel.ground, sel.reference, sel.shared_weights);
  const auto data = load_pairs(data_dir, "train", model.reference_branch().config.feature_width());
  fs::create_directories(out_dir);
  const TrainingReport report = train(data, model, config.loss, config.optimizer, out_dir / "checkpoints");
  save_checkpoint(out_dir / "model.json", model);
  std::string csv = "epoch,mean_loss\n";
  for (std::size_t e = 0; e < report.epoch_losses.size(); ++e) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%zu,%.12g\n", e + 1, report.epoch_losses[e]);
    csv += buf;
  }
  write_text(out_dir / "loss_curve.csv", csv);
  return report;
}

std::vector<HeadingEstimate> run_coldstart(const RunConfig& config, const fs::path& data_dir,
                                           const FeatureExtractor& extractor) {
  const GeoRaster world = load_world(data_dir);
  const auto frames = load_trajectory(data_dir / "trajectory.jsonl");
  Sequencer seq(world, extractor, config.geometry, config.sequencer);
  std::vector<HeadingEstimate> out;
  out.reserve(frames.size());
  for (const auto& f : frames) out.push_back(seq.step(f.observation));
  return out;
}

MetricsReport run_eval(const RunConfig& config, const fs::path& data_dir, const fs::path& out_dir,
                       const std::optional<fs::path>& checkpoint) {
  validate(config);
  const auto extractor = make_extractor(config, checkpoint);
  std::vector<double> headings;
  const auto pairs = load_pairs(data_dir, "test", 1, &headings);
  std::vector<Image> ground, reference;
  for (const auto& p : pairs) {
    ground.push_back(p.ground);
    reference.push_back(p.reference);
  }
  PairEvaluationOptions options;
  options.ks = config.eval.recall_ks;
  options.thresholds = config.eval.orientation_thresholds;
  MetricsReport report = evaluate_pairs(ground, reference, headings, *extractor, options);

  // The coverage table needs an extractor that accepts partial views.
  if (dynamic_cast<const HandcraftedExtractor*>(extractor.get()) && fs::exists(data_dir / "trajectory.jsonl")) {
    SequencerConfig sc = config.sequencer;
    sc.mode = SequencerMode::ColdStart;
    RunConfig rc = config;
    rc.sequencer = sc;
    const auto estimates = run_coldstart(rc, data_dir, *extractor);
    const auto frames = load_trajectory(data_dir / "trajectory.jsonl");
    std::vector<double> cov, est, truth;
    for (std::size_t i = 0; i < estimates.size(); ++i) {
      cov.push_back(estimates[i].fov_coverage_degrees);
      est.push_back(estimates[i].heading_degrees);
      truth.push_back(frames[i].truth.heading_degrees);
    }
    report.coverage = coverage_table(cov, est, truth, config.eval.coverage_gates, config.eval.table_thresholds);
  }
  write_report(out_dir, report);
  return report;
}

SearchResult run_location_search(const RunConfig& config, const fs::path& data_dir, const FeatureExtractor& extractor) {
  const GeoRaster world = load_world(data_dir);
  const auto frames = load_trajectory(data_dir / "trajectory.jsonl");
  std::vector<FrameObservation> obs;
  for (const auto& f : frames) obs.push_back(f.observation);
  if (obs.empty()) fail(ErrorCode::EmptySet, "trajectory has no frames");
  return search(obs, obs.front().global_position, world, extractor, config.geometry, config.search);
}

json to_json(const SearchResult& r) {
  auto hyp = [](const LocationHypothesis& h) {
    return json{{"lat", h.location.latitude},
                {"lon", h.location.longitude},
                {"grid_index", h.grid_index},
                {"frame0_score", h.frame0_score},
                {"score", h.score},
                {"best_bin", h.best_bin},
                {"heading_degrees", h.heading_degrees},
                {"consistent", h.consistent}};
  };
  json c = json::array();
  for (const auto& h : r.candidates) c.push_back(hyp(h));
  return {{"best", hyp(r.best)}, {"grid_size", r.grid_size}, {"threshold", r.threshold}, {"candidates", c}};
}

void run_stream(const RunConfig& config, const GeoRaster& world, const FeatureExtractor& extractor, std::istream& in,
                std::ostream& out, const fs::path& base_dir, bool fuse) {
  Sequencer seq(world, extractor, config.geometry, config.sequencer);
  FusionState state = config.fusion;
  std::optional<double> last_time;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      json j;
      try {
        j = json::parse(line);
      } catch (const json::exception& e) {
        fail(ErrorCode::InvalidArgument, e.what());
      }
      const FrameObservation frame = frame_from_json(j, base_dir);
      const HeadingEstimate est = seq.step(frame);
      json o = to_json(est);
      if (fuse) {
        const double dt = last_time ? frame.timestamp - *last_time : 0.0;
        state = predict(state, last_time ? frame.heading_delta : 0.0, dt);
        state = correct(state, est);
        o["fused_heading"] = state.heading;
        o["fused_variance"] = state.variance;
      }
      last_time = frame.timestamp;
      out << o.dump() << '\n';
    } catch (const Error& e) {
      out << json{{"line", lineno}, {"error", e.what()}, {"code", to_string(e.code())}}.dump() << '\n';
    }
    out.flush();
  }
}

}  // namespace georeg
