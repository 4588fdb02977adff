#include "georeg/extractor.hpp"

#include "georeg/error.hpp"

namespace georeg {

FeatureMap HandcraftedExtractor::ground(const Image& image, bool full_circle) const {
  if (full_circle) return extract_handcrafted(image, config_, true);
  const int f = config_.downsample;
  const int usable = image.width() / f * f;
  if (usable == 0) fail(ErrorCode::BadDimensions, "ground view narrower than one feature column");
  if (usable == image.width()) return extract_handcrafted(image, config_, false);
  return extract_handcrafted(column_window(image, 0, usable), config_, false);
}

FeatureMap HandcraftedExtractor::reference(const Image& polar) const { return extract_handcrafted(polar, config_, true); }

FeatureMap LearnedExtractor::ground(const Image& image, bool) const { return extract_learned(image, model_.ground); }

FeatureMap LearnedExtractor::reference(const Image& polar) const {
  return extract_learned(polar, model_.reference_branch());
}

FeatureMap ground_features(const FeatureExtractor& extractor, const Image& image, bool full_circle) {
  return normalize(extractor.ground(image, full_circle));
}

FeatureMap reference_features(const FeatureExtractor& extractor, const Image& polar) {
  return normalize(extractor.reference(polar));
}

}  // namespace georeg
