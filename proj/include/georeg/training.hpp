#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "georeg/image.hpp"
#include "georeg/learned_extractor.hpp"
#include "georeg/objective.hpp"

namespace georeg {

/// Matching ground panorama and polar reference; gt_bin is the reference
/// offset at which the ground view aligns.
struct PairSample {
  Image ground;
  Image reference;
  int gt_bin = 0;
};

/// round(heading * bins / 360) wrapped into [0, bins).
int heading_to_bin(double heading_degrees, int bins);

struct LossAndGradient {
  double loss = 0.0;
  std::vector<double> gradient;  // TwoBranchModel::flat() layout
};

/// Batch loss and its exact gradient with respect to every model weight.
/// Throws BatchTooSmall for fewer than two pairs and NonFiniteGradient when
/// a gradient entry is not finite.
LossAndGradient forward_backward(std::span<const PairSample* const> batch, const TwoBranchModel& model,
                                 const LossConfig& loss);

/// Forward pass only; same value as forward_backward(...).loss.
double batch_loss_value(std::span<const PairSample* const> batch, const TwoBranchModel& model, const LossConfig& loss);

struct OptimizerConfig {
  double learning_rate = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  bool cosine_schedule = true;  // decays to zero over all steps
  int epochs = 20;
  int batch_size = 16;
  std::uint64_t seed = 11;  // shuffling
};

void validate(const OptimizerConfig& config);

/// Adaptive-moment optimizer over a flat parameter vector.
class Adam {
 public:
  Adam(std::size_t size, const OptimizerConfig& config);
  void step(std::span<double> params, std::span<const double> grad, double learning_rate);
  std::size_t steps() const noexcept { return t_; }

 private:
  OptimizerConfig config_;
  std::vector<double> m_;
  std::vector<double> v_;
  std::size_t t_ = 0;
};

/// Step size at `step` of `total` under the configured schedule.
double scheduled_learning_rate(const OptimizerConfig& config, std::size_t step, std::size_t total);

struct TrainingReport {
  std::vector<double> epoch_losses;  // mean batch loss per epoch, before each update
  std::vector<double> batch_losses;
  std::size_t steps = 0;
};

/// Mini-batch training with in-batch negatives. A checkpoint is written to
/// `checkpoint_dir` after each epoch when given. Throws DivergedLoss on a
/// non-finite batch loss.
TrainingReport train(const std::vector<PairSample>& data, TwoBranchModel& model, const LossConfig& loss,
                     const OptimizerConfig& optimizer, const std::optional<std::filesystem::path>& checkpoint_dir = {},
                     const std::function<void(int epoch, double mean_loss)>& on_epoch = {});

void save_checkpoint(const std::filesystem::path& path, const TwoBranchModel& model);
TwoBranchModel load_checkpoint(const std::filesystem::path& path);
/// Throws ConfigMismatch unless the stored configs equal the expected ones.
TwoBranchModel load_checkpoint(const std::filesystem::path& path, const ExtractorConfig& ground,
                               const ExtractorConfig& reference, bool shared);

}  // namespace georeg
