#include "georeg/config.hpp"

#include <fstream>
#include <optional>
#include <set>
#include <type_traits>

#include "georeg/error.hpp"

namespace georeg {

using json = nlohmann::json;

namespace {

// One field list per struct drives both directions.
template <class V> void fields(V& v, WorldSpec& s) {
  v("seed", s.seed);
  v("extent_meters", s.extent_meters);
  v("meters_per_pixel", s.meters_per_pixel);
  v("density", s.density);
  v("road_count", s.road_count);
  v("road_width_meters", s.road_width_meters);
  v("smoothness", s.smoothness);
  v("symmetric", s.symmetric);
  v("center", s.center);
}

template <class V> void fields(V& v, GeometryConfig& s) {
  v("coverage_meters", s.coverage_meters);
  v("tile_pixels", s.tile_pixels);
  v("polar_width", s.polar_width);
  v("polar_height", s.polar_height);
}

template <class V> void fields(V& v, TrajectorySpec& s) {
  v("kind", s.kind);
  v("start", s.start);
  v("start_heading", s.start_heading);
  v("sweep_degrees", s.sweep_degrees);
  v("duration_seconds", s.duration_seconds);
  v("waypoints", s.waypoints);
  v("speed", s.speed);
  v("heading_offset", s.heading_offset);
  v("frame_rate", s.frame_rate);
  v("heading_sigma", s.heading_sigma);
  v("position_sigma", s.position_sigma);
  v("camera_fov", s.camera_fov);
  v("pixel_noise", s.pixel_noise);
  v("seed", s.seed);
}

template <class V> void fields(V& v, PairSpec& s) {
  v("count", s.count);
  v("min_separation_meters", s.min_separation_meters);
  v("pixel_noise", s.pixel_noise);
  v("seed", s.seed);
}

template <class V> void fields(V& v, HandcraftedConfig& s) {
  v("downsample", s.downsample);
  v("orientation_bins", s.orientation_bins);
  v("intensity_weight", s.intensity_weight);
  v("column_normalize", s.column_normalize);
}

template <class V> void fields(V& v, ExtractorConfig& s) {
  v("image_width", s.image_width);
  v("image_height", s.image_height);
  v("patch", s.patch);
  v("embed_dim", s.embed_dim);
  v("heads", s.heads);
  v("blocks", s.blocks);
  v("mlp_dim", s.mlp_dim);
  v("feature_channels", s.feature_channels);
  v("downsample", s.downsample);
  v("circular_width", s.circular_width);
  v("seed", s.seed);
}

template <class V> void fields(V& v, ExtractorSelection& s) {
  v("kind", s.kind);
  v("handcrafted", s.handcrafted);
  v("ground", s.ground);
  v("reference", s.reference);
  v("shared_weights", s.shared_weights);
  v("checkpoint", s.checkpoint);
}

template <class V> void fields(V& v, LossConfig& s) {
  v("alpha", s.alpha);
  v("beta", s.beta);
  v("negatives", s.negatives);
}

template <class V> void fields(V& v, OptimizerConfig& s) {
  v("learning_rate", s.learning_rate);
  v("beta1", s.beta1);
  v("beta2", s.beta2);
  v("epsilon", s.epsilon);
  v("cosine_schedule", s.cosine_schedule);
  v("epochs", s.epochs);
  v("batch_size", s.batch_size);
  v("seed", s.seed);
}

template <class V> void fields(V& v, SequencerConfig& s) {
  v("tau_seconds", s.tau_seconds);
  v("max_frames", s.max_frames);
  v("fov_threshold", s.fov_threshold);
  v("ratio_threshold", s.ratio_threshold);
  v("camera_fov", s.camera_fov);
  v("refine_window", s.refine_window);
  v("mode", s.mode);
}

template <class V> void fields(V& v, SearchConfig& s) {
  v("region_east", s.region_east);
  v("region_north", s.region_north);
  v("spacing", s.spacing);
  v("top_n", s.top_n);
  v("consistency_frames", s.consistency_frames);
  v("threshold_fraction", s.threshold_fraction);
  v("similarity_threshold", s.similarity_threshold);
}

template <class V> void fields(V& v, FusionState& s) {
  v("initial_heading", s.heading);
  v("initial_variance", s.variance);
  v("process_noise_rate", s.process_noise_rate);
  v("measurement_variance", s.measurement_variance);
}

template <class V> void fields(V& v, EvalConfig& s) {
  v("recall_ks", s.recall_ks);
  v("orientation_thresholds", s.orientation_thresholds);
  v("coverage_gates", s.coverage_gates);
  v("table_thresholds", s.table_thresholds);
  v("test_fraction", s.test_fraction);
}

template <class V> void fields(V& v, RunConfig& s) {
  v("world", s.world);
  v("geometry", s.geometry);
  v("trajectory", s.trajectory);
  v("pairs", s.pairs);
  v("extractor", s.extractor);
  v("loss", s.loss);
  v("optimizer", s.optimizer);
  v("sequencer", s.sequencer);
  v("search", s.search);
  v("fusion", s.fusion);
  v("eval", s.eval);
}

[[noreturn]] void schema_error(const std::string& where, const std::string& what) {
  fail(ErrorCode::InvalidArgument, "config " + where + ": " + what);
}

// Encoding.

template <class T> json encode(const T& v);

json encode_value(const GeoPoint& p) { return {{"lat", p.latitude}, {"lon", p.longitude}}; }
json encode_value(const NegativeStrategy& n) { return n == NegativeStrategy::Hardest ? "hardest" : "all-in-batch"; }
json encode_value(const SequencerMode& m) { return to_string(m); }
json encode_value(const TrajectoryKind& k) { return k == TrajectoryKind::Waypoints ? "waypoints" : "stationary-sweep"; }
json encode_value(const std::optional<GeoPoint>& p) { return p ? encode_value(*p) : json(nullptr); }
json encode_value(const std::optional<double>& d) { return d ? json(*d) : json(nullptr); }
json encode_value(const std::vector<EastNorth>& w) {
  json a = json::array();
  for (const auto& e : w) a.push_back({e.east, e.north});
  return a;
}

struct Writer {
  json out = json::object();
  template <class T> void operator()(const char* key, T& value) { out[key] = encode(value); }
};

template <class T> json encode(const T& v) {
  if constexpr (requires(Writer w, T c) { fields(w, c); }) {
    T copy = v;
    Writer w;
    fields(w, copy);
    return w.out;
  } else if constexpr (std::is_arithmetic_v<T> || std::is_same_v<T, std::string>) {
    return json(v);  // keeps bool and int away from the optional<double> overload
  } else if constexpr (requires { encode_value(v); }) {
    return encode_value(v);
  } else {
    return json(v);
  }
}

// Decoding.

struct Reader;
template <class T> void decode(const json& j, T& v, const std::string& where);

void decode_value(const json& j, GeoPoint& p, const std::string& where) {
  if (!j.is_object()) schema_error(where, "expected an object with lat and lon");
  for (const auto& [k, _] : j.items())
    if (k != "lat" && k != "lon") schema_error(where, "unknown key '" + k + "'");
  p.latitude = j.at("lat").get<double>();
  p.longitude = j.at("lon").get<double>();
}

void decode_value(const json& j, NegativeStrategy& n, const std::string& where) {
  const auto s = j.get<std::string>();
  if (s == "all-in-batch") n = NegativeStrategy::AllInBatch;
  else if (s == "hardest") n = NegativeStrategy::Hardest;
  else schema_error(where, "expected all-in-batch or hardest");
}

void decode_value(const json& j, SequencerMode& m, const std::string&) { m = parse_sequencer_mode(j.get<std::string>()); }

void decode_value(const json& j, TrajectoryKind& k, const std::string& where) {
  const auto s = j.get<std::string>();
  if (s == "stationary-sweep") k = TrajectoryKind::StationarySweep;
  else if (s == "waypoints") k = TrajectoryKind::Waypoints;
  else schema_error(where, "expected stationary-sweep or waypoints");
}

void decode_value(const json& j, std::optional<GeoPoint>& p, const std::string& where) {
  if (j.is_null()) {
    p.reset();
    return;
  }
  GeoPoint g;
  decode_value(j, g, where);
  p = g;
}

void decode_value(const json& j, std::optional<double>& d, const std::string&) {
  if (j.is_null()) d.reset();
  else d = j.get<double>();
}

void decode_value(const json& j, std::vector<EastNorth>& w, const std::string& where) {
  w.clear();
  for (const auto& e : j) {
    if (!e.is_array() || e.size() != 2) schema_error(where, "waypoints are [east, north] pairs");
    w.push_back({e[0].get<double>(), e[1].get<double>()});
  }
}

struct Reader {
  const json& in;
  std::string where;
  std::set<std::string> known;

  template <class T> void operator()(const char* key, T& value) {
    known.insert(key);
    if (in.contains(key)) decode(in.at(key), value, where + "." + key);
  }
  void finish() const {
    for (const auto& [k, _] : in.items())
      if (!known.count(k)) schema_error(where, "unknown key '" + k + "'");
  }
};

template <class T> void decode(const json& j, T& v, const std::string& where) {
  try {
    if constexpr (requires(Writer w, T c) { fields(w, c); }) {
      if (!j.is_object()) schema_error(where, "expected an object");
      Reader r{j, where, {}};
      fields(r, v);
      r.finish();
    } else if constexpr (requires { decode_value(j, v, where); }) {
      decode_value(j, v, where);
    } else {
      v = j.get<T>();
    }
  } catch (const json::exception& e) {
    schema_error(where, e.what());
  }
}

}  // namespace

json to_json(const WorldSpec& v) { return encode(v); }
json to_json(const GeometryConfig& v) { return encode(v); }
json to_json(const TrajectorySpec& v) { return encode(v); }
json to_json(const PairSpec& v) { return encode(v); }
json to_json(const HandcraftedConfig& v) { return encode(v); }
json to_json(const ExtractorConfig& v) { return encode(v); }
json to_json(const ExtractorSelection& v) { return encode(v); }
json to_json(const LossConfig& v) { return encode(v); }
json to_json(const OptimizerConfig& v) { return encode(v); }
json to_json(const SequencerConfig& v) { return encode(v); }
json to_json(const SearchConfig& v) { return encode(v); }
json to_json(const FusionState& v) { return encode(v); }
json to_json(const EvalConfig& v) { return encode(v); }
json to_json(const RunConfig& v) { return encode(v); }

ExtractorConfig extractor_config_from_json(const json& j) {
  ExtractorConfig c;
  decode(j, c, "extractor");
  return c;
}

RunConfig run_config_from_json(const json& j) {
  RunConfig c;
  decode(j, c, "run");
  validate(c);
  return c;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::Io, "cannot open run config " + path.string());
  json j;
  try {
    j = json::parse(in, nullptr, true, true);
  } catch (const json::exception& e) {
    fail(ErrorCode::InvalidArgument, "run config " + path.string() + " is not valid JSON: " + e.what());
  }
  return run_config_from_json(j);
}

void validate(const RunConfig& c) {
  validate(c.world);
  validate(c.trajectory);
  validate(c.loss);
  validate(c.optimizer);
  validate(c.sequencer);
  validate(c.search);
  validate(c.fusion);
  if (c.extractor.kind != "handcrafted" && c.extractor.kind != "learned")
    fail(ErrorCode::InvalidArgument, "extractor.kind must be handcrafted or learned");
  if (c.extractor.kind == "learned") {
    validate(c.extractor.ground);
    validate(c.extractor.reference);
  }
  if (c.geometry.polar_width < 4 || c.geometry.polar_height < 1 || !(c.geometry.coverage_meters > 0.0))
    fail(ErrorCode::InvalidArgument, "geometry sizes must be positive");
  if (!(c.eval.test_fraction > 0.0 && c.eval.test_fraction < 1.0))
    fail(ErrorCode::InvalidArgument, "eval.test_fraction must lie in (0, 1)");
  if (c.eval.recall_ks.empty()) fail(ErrorCode::InvalidArgument, "eval.recall_ks must not be empty");
}

}  // namespace georeg
