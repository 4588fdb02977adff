#pragma once

#include <memory>

#include "georeg/feature_map.hpp"
#include "georeg/handcrafted.hpp"
#include "georeg/image.hpp"
#include "georeg/learned_extractor.hpp"

namespace georeg {

/// Produces ground and reference feature maps. Implementations are pure, so
/// one instance can be shared by readers.
class FeatureExtractor {
 public:
  virtual ~FeatureExtractor() = default;

  /// `full_circle` marks a 360-degree panorama whose columns wrap.
  virtual FeatureMap ground(const Image& image, bool full_circle) const = 0;
  /// Features of a polar-transformed reference image (always circular).
  virtual FeatureMap reference(const Image& polar) const = 0;
  /// Image columns per feature column.
  virtual int downsample() const noexcept = 0;
};

class HandcraftedExtractor final : public FeatureExtractor {
 public:
  explicit HandcraftedExtractor(HandcraftedConfig config = {}) : config_(config) {}

  /// Partial views are cropped on the right to a multiple of the downsample
  /// factor so the left edge stays aligned with the heading bin.
  FeatureMap ground(const Image& image, bool full_circle) const override;
  FeatureMap reference(const Image& polar) const override;
  int downsample() const noexcept override { return config_.downsample; }
  const HandcraftedConfig& config() const noexcept { return config_; }

 private:
  HandcraftedConfig config_;
};

class LearnedExtractor final : public FeatureExtractor {
 public:
  explicit LearnedExtractor(TwoBranchModel model) : model_(std::move(model)) {}

  FeatureMap ground(const Image& image, bool full_circle) const override;
  FeatureMap reference(const Image& polar) const override;
  int downsample() const noexcept override { return model_.ground.config.downsample; }
  const TwoBranchModel& model() const noexcept { return model_; }

 private:
  TwoBranchModel model_;
};

/// Normalized features, ready for similarity and distance computations.
FeatureMap ground_features(const FeatureExtractor& extractor, const Image& image, bool full_circle);
FeatureMap reference_features(const FeatureExtractor& extractor, const Image& polar);

}  // namespace georeg
