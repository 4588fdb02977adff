// Command-line front end: simgen, train, eval, coldstart, stream.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "georeg/config.hpp"
#include "georeg/error.hpp"
#include "georeg/pipeline.hpp"
#include "georeg/raster.hpp"
#include "georeg/simd.hpp"

namespace fs = std::filesystem;
using georeg::RunConfig;

namespace {

struct GateFlags {
  std::optional<double> tau;
  std::optional<double> fov_threshold;
  std::optional<double> ratio_threshold;
  bool refine = false;

  void add(CLI::App* cmd) {
    cmd->add_option("--tau", tau, "buffer horizon in seconds");
    cmd->add_option("--fov-threshold", fov_threshold, "coverage gate in degrees");
    cmd->add_option("--ratio-threshold", ratio_threshold, "ratio-test gate in [0, 1]");
    cmd->add_flag("--refine", refine, "restrict the arg-max to the window around the navigation prior");
  }
  void apply(RunConfig& c) const {
    if (tau) c.sequencer.tau_seconds = *tau;
    if (fov_threshold) c.sequencer.fov_threshold = *fov_threshold;
    if (ratio_threshold) c.sequencer.ratio_threshold = *ratio_threshold;
    if (refine) c.sequencer.mode = georeg::SequencerMode::Refine;
    georeg::validate(c.sequencer);
  }
};

RunConfig load(const std::string& path) { return path.empty() ? RunConfig{} : georeg::load_run_config(path); }

std::optional<fs::path> maybe_path(const std::string& s) {
  if (s.empty()) return std::nullopt;
  return fs::path(s);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cross-view geo-registration: heading and location from ground frames against aerial imagery"};
  app.require_subcommand(1);
  std::string config_path;
  app.add_option("-c,--config", config_path, "run config JSON (defaults when omitted)");

  std::string out_dir, data_dir, checkpoint, world_path, base_dir, output_file;

  auto* simgen = app.add_subcommand("simgen", "write a synthetic world, trajectory and pair dataset");
  simgen->add_option("-o,--out", out_dir, "output directory")->required();

  auto* train = app.add_subcommand("train", "train the learned extractor on the train split");
  train->add_option("-d,--data", data_dir, "simgen directory")->required();
  train->add_option("-o,--out", out_dir, "output directory")->required();

  auto* eval = app.add_subcommand("eval", "retrieval, orientation and coverage metrics on the test split");
  eval->add_option("-d,--data", data_dir, "simgen directory")->required();
  eval->add_option("-o,--out", out_dir, "output directory")->required();
  eval->add_option("--checkpoint", checkpoint, "learned weights (overrides the config)");

  GateFlags cold_gates;
  bool gps_challenged = false;
  auto* coldstart = app.add_subcommand("coldstart", "heading (and optionally location) over a stored trajectory");
  coldstart->add_option("-d,--data", data_dir, "simgen directory")->required();
  coldstart->add_option("--checkpoint", checkpoint, "learned weights (overrides the config)");
  coldstart->add_option("-o,--output", output_file, "write results here instead of stdout");
  coldstart->add_flag("--gps-challenged", gps_challenged, "search location and heading jointly around the first fix");
  cold_gates.add(coldstart);

  GateFlags stream_gates;
  bool fuse = false;
  auto* stream = app.add_subcommand("stream", "JSON-lines frames on stdin, heading estimates on stdout");
  stream->add_option("-w,--world", world_path, "geo-referenced world raster (PGM with JSON sidecar)")->required();
  stream->add_option("--base-dir", base_dir, "directory that relative image paths resolve against");
  stream->add_option("--checkpoint", checkpoint, "learned weights (overrides the config)");
  stream->add_flag("--fuse", fuse, "append the fused heading from the scalar filter");
  stream_gates.add(stream);

  CLI11_PARSE(app, argc, argv);

  try {
    RunConfig config = load(config_path);
    std::fprintf(stderr, "simd: %s\n", georeg::simd::active().name);

    if (*simgen) {
      const auto s = georeg::run_simgen(config, out_dir);
      std::printf("wrote %zu frames and %zu pairs (%zu test) to %s\n", s.frames, s.pairs, s.test_pairs, out_dir.c_str());
    } else if (*train) {
      const auto r = georeg::run_train(config, data_dir, out_dir);
      for (std::size_t e = 0; e < r.epoch_losses.size(); ++e) std::printf("epoch %zu  loss %.6f\n", e + 1, r.epoch_losses[e]);
      std::printf("model written to %s\n", (fs::path(out_dir) / "model.json").c_str());
    } else if (*eval) {
      const auto report = georeg::run_eval(config, data_dir, out_dir, maybe_path(checkpoint));
      std::printf("%s\n", georeg::to_json(report).dump(2).c_str());
      if (report.coverage) std::printf("%s", georeg::format_coverage_table(*report.coverage).c_str());
    } else if (*coldstart) {
      cold_gates.apply(config);
      const auto extractor = georeg::make_extractor(config, maybe_path(checkpoint));
      std::string text;
      if (gps_challenged) {
        text = georeg::to_json(georeg::run_location_search(config, data_dir, *extractor)).dump(2) + "\n";
      } else {
        for (const auto& e : georeg::run_coldstart(config, data_dir, *extractor)) text += georeg::to_json(e).dump() + "\n";
      }
      if (output_file.empty()) {
        std::fputs(text.c_str(), stdout);
      } else {
        std::ofstream out(output_file);
        out << text;
        if (!out) georeg::fail(georeg::ErrorCode::Io, "cannot write " + output_file);
      }
    } else if (*stream) {
      stream_gates.apply(config);
      const auto extractor = georeg::make_extractor(config, maybe_path(checkpoint));
      const georeg::GeoRaster world = georeg::load_geo_raster(world_path);
      georeg::run_stream(config, world, *extractor, std::cin, std::cout, base_dir.empty() ? fs::current_path() : fs::path(base_dir),
                         fuse);
    }
  } catch (const georeg::Error& e) {
    std::fprintf(stderr, "error [%s]: %s\n", georeg::to_string(e.code()), e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
