#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "georeg/autodiff.hpp"
#include "georeg/feature_map.hpp"
#include "georeg/image.hpp"

namespace georeg {

/// Shape of the toy transformer encoder-decoder. One instance per branch.
struct ExtractorConfig {
  int image_width = 256;
  int image_height = 64;
  int patch = 16;
  int embed_dim = 32;      // K_E
  int heads = 2;
  int blocks = 2;
  int mlp_dim = 64;
  int feature_channels = 16;  // K_D
  int downsample = 8;         // feature resolution = image resolution / downsample
  bool circular_width = true;
  std::uint64_t seed = 7;

  int grid_width() const noexcept { return image_width / patch; }
  int grid_height() const noexcept { return image_height / patch; }
  int token_count() const noexcept { return grid_width() * grid_height(); }
  int feature_width() const noexcept { return image_width / downsample; }
  int feature_height() const noexcept { return image_height / downsample; }
  /// Number of conv + 2x-upsample stages between the token grid and the output.
  int upsample_stages() const noexcept;

  bool operator==(const ExtractorConfig&) const = default;
};

/// Throws InvalidArgument when sizes are inconsistent (patch does not tile
/// the image, downsample does not divide the patch by a power of two, ...).
void validate(const ExtractorConfig& config);

/// Named slice of the flat weight vector.
struct ParamSlot {
  std::string name;
  std::size_t offset = 0;
  ad::Shape shape;
  std::size_t fan_in = 0;
};

std::vector<ParamSlot> parameter_layout(const ExtractorConfig& config);

/// All trainable weights of one branch, flat-indexable so optimizers and
/// gradient checks can treat them as a single vector.
struct ExtractorParams {
  ExtractorConfig config;
  std::vector<double> weights;

  std::size_t size() const noexcept { return weights.size(); }
  ParamSlot slot(const std::string& name) const;
  std::span<double> slice(const std::string& name);
  std::span<const double> slice(const std::string& name) const;
};

/// Seeded initialization: weights and biases uniform in +-1/sqrt(fan_in),
/// layer-norm gains 1 and offsets 0, positional embeddings uniform in +-0.02.
ExtractorParams initialize_params(const ExtractorConfig& config);

/// Graph-level forward pass: returns a (W_out, H_out, K_D) node. Parameter
/// leaves are appended to `leaves` in layout order.
ad::Var build_extractor(ad::Tape& tape, const Image& image, const ExtractorParams& params,
                        std::vector<ad::Var>* leaves = nullptr);

/// Forward pass only. Throws ShapeMismatch for a wrongly sized image and
/// NonFiniteActivation if the output is not finite.
FeatureMap extract_learned(const Image& image, const ExtractorParams& params);

FeatureMap to_feature_map(const ad::Tape& tape, ad::Var node);

/// Ground and reference branches. With `shared` set both branches read the
/// ground weights and `reference` is unused.
struct TwoBranchModel {
  ExtractorParams ground;
  ExtractorParams reference;
  bool shared = false;

  const ExtractorParams& reference_branch() const noexcept { return shared ? ground : reference; }
  /// Trainable scalars: ground weights, then reference weights unless shared.
  std::size_t parameter_count() const noexcept { return ground.size() + (shared ? 0 : reference.size()); }
  std::vector<double> flat() const;
  void assign_flat(std::span<const double> values);
};

/// Branch seeds are offset so the two branches start from different weights.
TwoBranchModel make_model(const ExtractorConfig& ground, const ExtractorConfig& reference, bool shared = false);

}  // namespace georeg
