#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "doctest.h"
#include "georeg/config.hpp"
#include "georeg/error.hpp"
#include "georeg/evaluation.hpp"
#include "georeg/extractor.hpp"
#include "georeg/pipeline.hpp"
#include "georeg/synthetic_world.hpp"
#include "georeg/training.hpp"
#include "support.hpp"

using namespace georeg;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("georeg_eval_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ExtractorConfig tiny(int w, int h) {
  ExtractorConfig c;
  c.image_width = w;
  c.image_height = h;
  c.embed_dim = 8;
  c.blocks = 1;
  c.mlp_dim = 16;
  c.feature_channels = 4;
  return c;
}

}  // namespace

TEST_SUITE("evaluation-harness") {

TEST_CASE("recall: identical pairs, orthogonal others") {
  std::vector<FeatureMap> q, r;
  for (int i = 0; i < 5; ++i) {
    FeatureMap f(1, 1, 5);
    f.at(0, 0, i) = 1.0;
    q.push_back(f);
    r.push_back(f);
  }
  const std::vector<std::size_t> pairing{0, 1, 2, 3, 4};
  const std::vector<int> ks{1, 5};
  CHECK(recall_at_k(q, r, pairing, ks).at(1) == 1.0);
}

TEST_CASE("recall: hand-ranked four-item set") {
  DistanceMatrix d;
  d.queries = d.references = 4;
  // Query 2's partner (reference 2) ranks third.
  d.values = {0.1, 0.5, 0.6, 0.7,  //
              0.9, 0.2, 0.8, 0.7,  //
              0.3, 0.4, 0.5, 0.9,  //
              0.8, 0.9, 0.7, 0.1};
  const std::vector<std::size_t> pairing{0, 1, 2, 3};
  CHECK(rank_of(d, 2, 2) == 3);
  const auto rec = recall_at_k(d, pairing, std::vector<int>{1, 2, 3, 5});
  CHECK(rec.at(1) == 0.75);
  CHECK(rec.at(2) == 0.75);
  CHECK(rec.at(3) == 1.0);
  CHECK(rec.at(5) == 1.0);
  // Ties count lower indices as closer.
  DistanceMatrix t;
  t.queries = 1;
  t.references = 3;
  t.values = {0.5, 0.5, 0.5};
  CHECK(rank_of(t, 0, 1) == 2);
  CHECK_THROWS_AS(recall_at_k(DistanceMatrix{}, std::vector<std::size_t>{}, std::vector<int>{1}), Error);
}

TEST_CASE("recall is monotone in k") {
  std::mt19937_64 rng(80);
  std::vector<FeatureMap> q, r;
  for (int i = 0; i < 12; ++i) q.push_back(testing::random_map(rng, 3, 2, 2)), r.push_back(testing::random_map(rng, 8, 2, 2));
  std::vector<std::size_t> pairing(12);
  for (std::size_t i = 0; i < 12; ++i) pairing[i] = i;
  const auto rec = recall_at_k(q, r, pairing, std::vector<int>{1, 2, 3, 5, 8, 12, 20});
  double prev = 0;
  for (const auto& [k, v] : rec) {
    CHECK(v >= prev);
    CHECK(v <= 1.0);
    prev = v;
  }
  CHECK(prev == 1.0);
}

TEST_CASE("distance matrix uses the aligned Frobenius distance") {
  std::mt19937_64 rng(81);
  const FeatureMap r = testing::random_map(rng, 10, 2, 2);
  const FeatureMap q = testing::oracle_window(r, 4, 3);
  const DistanceMatrix d = distance_matrix(std::vector<FeatureMap>{q}, std::vector<FeatureMap>{r});
  CHECK(d.at(0, 0) == doctest::Approx(0.0));
}

TEST_CASE("orientation accuracy examples") {
  const std::vector<double> truth{10, 20, 30, 40};
  const std::vector<double> th{2, 4, 6, 12};
  for (const auto& [t, v] : orientation_accuracy(truth, truth, th)) CHECK(v == 1.0);
  const std::vector<double> est{11, 23, 29, 50};  // errors 1, 3, 1 (wrapped below), 10
  std::vector<double> wrapped = est;
  wrapped[2] = 30 + 359;  // 359 degrees off is 1 degree wrapped
  const auto acc = orientation_accuracy(wrapped, truth, th);
  CHECK(acc.at(2) == 0.5);
  CHECK(acc.at(4) == 0.75);
  CHECK(acc.at(6) == 0.75);
  CHECK(acc.at(12) == 1.0);
  CHECK_THROWS_AS(orientation_accuracy(std::vector<double>{}, std::vector<double>{}, th), Error);
  CHECK(testing::wrapped_error(0, 180) == 180);
}

TEST_CASE("orientation accuracy is monotone in the threshold") {
  std::mt19937_64 rng(82);
  std::uniform_real_distribution<double> u(0, 360);
  std::vector<double> a, b;
  for (int i = 0; i < 100; ++i) a.push_back(u(rng)), b.push_back(u(rng));
  double prev = 0;
  for (const auto& [t, v] : orientation_accuracy(a, b, std::vector<double>{1, 5, 20, 90, 179, 180})) {
    CHECK(v >= prev);
    prev = v;
  }
  CHECK(prev == 1.0);
}

TEST_CASE("coverage table layout") {
  const std::vector<double> cov{50, 130, 200, 360};
  const std::vector<double> est{0, 3, 1, 20};
  const std::vector<double> tru{0, 0, 0, 0};
  const auto t = coverage_table(cov, est, tru, std::vector<double>{0, 120, 180}, std::vector<double>{2, 5, 10});
  REQUIRE(t.counts == std::vector<std::size_t>{4, 3, 2});
  CHECK(t.accuracy[0][0] == 0.5);
  CHECK(t.accuracy[1][1] == doctest::Approx(2.0 / 3));
  CHECK(t.accuracy[2][2] == 0.5);
  CHECK_FALSE(format_coverage_table(t).empty());
}

TEST_CASE("manifest round trip") {
  const fs::path dir = scratch("manifest");
  std::vector<DatasetRecord> rows{{"pairs/g0.pgm", "pairs/r0.pgm", {37.1, -122.2}, 12.5, "train"},
                                  {"pairs/g1.pgm", "pairs/r1.pgm", {37.2, -122.3}, 359.0, "test"}};
  write_manifest(dir / "m.csv", rows);
  const auto back = read_manifest(dir / "m.csv");
  REQUIRE(back.size() == 2);
  CHECK(back[1].ground_path == "pairs/g1.pgm");
  CHECK(back[1].split == "test");
  CHECK(back[0].heading_degrees == 12.5);
  CHECK(back[0].location.latitude == doctest::Approx(37.1).epsilon(1e-12));
}

TEST_CASE("handcrafted extractor on a noise-free set retrieves every pair") {
  WorldSpec w;
  w.extent_meters = 300;
  const GeoRaster world = generate_world(w);
  PairSpec p;
  p.count = 20;
  p.pixel_noise = 0;
  const GeometryConfig g{144.0, 0, 256, 32};
  const auto pairs = generate_pairs(world, p, g);
  std::vector<Image> ground, ref;
  std::vector<double> headings;
  for (const auto& pr : pairs) ground.push_back(pr.ground), ref.push_back(pr.reference), headings.push_back(pr.heading_degrees);
  const MetricsReport m = evaluate_pairs(ground, ref, headings, HandcraftedExtractor(HandcraftedConfig{4, 8, 1.0}), {});
  CHECK(m.recall_at.at(1) == 1.0);
  double prev = 0;
  for (const auto& [k, v] : m.recall_at) {
    CHECK(v >= prev);
    prev = v;
  }
  CHECK(m.orientation_accuracy_bins.at(1) == 1.0);
  CHECK(m.per_query.size() == 20);
  const fs::path dir = scratch("report");
  write_report(dir, m);
  CHECK(fs::exists(dir / "metrics.json"));
  CHECK(fs::exists(dir / "per_query.csv"));
  const std::string first = slurp(dir / "metrics.json");
  write_report(dir, m);
  CHECK(slurp(dir / "metrics.json") == first);
}

TEST_CASE("training: zero learning rate leaves parameters unchanged") {
  std::mt19937_64 rng(83);
  std::vector<PairSample> data;
  for (int i = 0; i < 6; ++i) {
    PairSample s;
    s.reference = testing::random_image(rng, 64, 32);
    s.ground = shift_columns(s.reference, 8 * i);
    s.gt_bin = i;
    data.push_back(s);
  }
  TwoBranchModel model = make_model(tiny(64, 32), tiny(64, 32));
  const auto before = model.flat();
  OptimizerConfig opt;
  opt.learning_rate = 0;
  opt.epochs = 3;
  opt.batch_size = 6;  // one batch per epoch, so the shuffle cannot change its loss
  const TrainingReport r = train(data, model, {}, opt);
  CHECK(model.flat() == before);
  REQUIRE(r.epoch_losses.size() == 3);
  for (double l : r.epoch_losses) CHECK(l == doctest::Approx(r.epoch_losses[0]).epsilon(1e-12));
}

TEST_CASE("training: fixed seed is bit reproducible and checkpoints each epoch") {
  std::mt19937_64 rng(84);
  std::vector<PairSample> data;
  for (int i = 0; i < 4; ++i) {
    PairSample s;
    s.reference = testing::random_image(rng, 64, 32);
    s.ground = shift_columns(s.reference, 8 * i);
    s.gt_bin = i;
    data.push_back(s);
  }
  OptimizerConfig opt;
  opt.learning_rate = 1e-3;
  opt.epochs = 2;
  opt.batch_size = 2;
  const fs::path dir = scratch("ckpt");
  TwoBranchModel a = make_model(tiny(64, 32), tiny(64, 32));
  TwoBranchModel b = make_model(tiny(64, 32), tiny(64, 32));
  const auto ra = train(data, a, {}, opt, dir);
  const auto rb = train(data, b, {}, opt);
  CHECK(ra.batch_losses == rb.batch_losses);
  CHECK(a.flat() == b.flat());
  CHECK(fs::exists(dir / "checkpoint_epoch001.json"));
  CHECK(fs::exists(dir / "checkpoint_epoch002.json"));
  CHECK(load_checkpoint(dir / "checkpoint_epoch002.json").ground.weights == a.ground.weights);
}

TEST_CASE("optimizer pieces") {
  OptimizerConfig c;
  CHECK(c.learning_rate == 1e-4);
  CHECK(c.batch_size == 16);
  CHECK(scheduled_learning_rate(c, 0, 100) == doctest::Approx(1e-4));
  CHECK(scheduled_learning_rate(c, 50, 100) == doctest::Approx(0.5e-4));
  CHECK(scheduled_learning_rate(c, 100, 100) == doctest::Approx(0.0));
  c.cosine_schedule = false;
  CHECK(scheduled_learning_rate(c, 70, 100) == 1e-4);
  // First Adam step moves each coordinate by about lr against the gradient sign.
  Adam adam(3, c);
  std::vector<double> p{1, 1, 1};
  adam.step(p, std::vector<double>{2, -0.5, 0}, 0.1);
  CHECK(p[0] == doctest::Approx(0.9));
  CHECK(p[1] == doctest::Approx(1.1));
  CHECK(p[2] == 1.0);
  CHECK(adam.steps() == 1);
  CHECK(heading_to_bin(359.9, 64) == 0);
  CHECK(heading_to_bin(90, 64) == 16);
}

TEST_CASE("run config round trip and schema errors") {
  RunConfig c;
  c.world.seed = 9;
  c.sequencer.mode = SequencerMode::Refine;
  c.loss.negatives = NegativeStrategy::Hardest;
  c.search.similarity_threshold = 0.4;
  c.trajectory.kind = TrajectoryKind::Waypoints;
  c.trajectory.waypoints = {{1, 2}, {3, 4}};
  const auto j = to_json(c);
  const RunConfig back = run_config_from_json(j);
  CHECK(to_json(back) == j);
  CHECK(back.sequencer.mode == SequencerMode::Refine);
  CHECK(back.search.similarity_threshold.value() == 0.4);
  auto bad = j;
  bad["sequencer"]["tau"] = 3;
  CHECK_THROWS_AS(run_config_from_json(bad), Error);
  bad = j;
  bad["loss"]["negatives"] = "semi-hard";
  CHECK_THROWS_AS(run_config_from_json(bad), Error);
  const fs::path dir = scratch("config");
  {
    std::ofstream out(dir / "c.json");
    out << "{\n  // comments are allowed\n  \"world\": {\"seed\": 4}\n}\n";
  }
  CHECK(load_run_config(dir / "c.json").world.seed == 4);
  try {
    load_run_config(dir / "missing.json");
    FAIL("expected Io");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Io);
  }
}

TEST_CASE("stream: malformed lines produce error records and leave state alone") {
  RunConfig c;
  c.world.extent_meters = 240;
  c.geometry = {144.0, 0, 256, 32};
  const GeoRaster world = generate_world(c.world);
  const fs::path dir = scratch("stream");
  TrajectorySpec t;
  t.duration_seconds = 0.2;
  const auto frames = generate_trajectory(world, t, c.geometry);
  std::string input;
  for (std::size_t i = 0; i < frames.size(); ++i) {
    write_pgm(dir / ("f" + std::to_string(i) + ".pgm"), frames[i].observation.image);
    input += frame_to_json(frames[i], i, "f" + std::to_string(i) + ".pgm").dump() + "\n";
    if (i == 1) input += "{not json\n";
  }
  std::istringstream in(input);
  std::ostringstream out;
  const auto extractor = make_extractor(c);
  run_stream(c, world, *extractor, in, out, dir, true);
  std::istringstream lines(out.str());
  std::string line;
  int estimates = 0, errors = 0;
  while (std::getline(lines, line)) {
    const auto j = nlohmann::json::parse(line);
    if (j.contains("error")) ++errors;
    else {
      ++estimates;
      CHECK(j.contains("fused_heading"));
    }
  }
  CHECK(estimates == static_cast<int>(frames.size()));
  CHECK(errors == 1);
}

}  // TEST_SUITE
