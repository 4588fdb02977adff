#include "georeg/feature_map.hpp"

#include <algorithm>
#include <cmath>

#include "georeg/error.hpp"
#include "georeg/geo.hpp"

namespace georeg {

FeatureMap::FeatureMap(int width, int height, int channels, double fill)
    : width_(width), height_(height), channels_(channels) {
  if (width < 0 || height < 0 || channels < 0) fail(ErrorCode::BadDimensions, "negative feature map shape");
  data_.assign(static_cast<std::size_t>(width) * height * channels, fill);
}

FeatureMap::FeatureMap(int width, int height, int channels, std::vector<double> data)
    : width_(width), height_(height), channels_(channels), data_(std::move(data)) {
  if (width < 0 || height < 0 || channels < 0 ||
      data_.size() != static_cast<std::size_t>(width) * height * channels)
    fail(ErrorCode::BadDimensions, "feature data does not match its shape");
}

double FeatureMap::frobenius_norm() const noexcept {
  // Scaled accumulation guards against overflow for very large activations.
  double scale = 0.0;
  for (double v : data_) scale = std::max(scale, std::fabs(v));
  if (scale == 0.0 || !std::isfinite(scale)) return scale;
  double sum = 0.0;
  for (double v : data_) {
    const double t = v / scale;
    sum += t * t;
  }
  return scale * std::sqrt(sum);
}

bool FeatureMap::all_finite() const noexcept {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

FeatureMap normalize(const FeatureMap& f) {
  const double norm = f.frobenius_norm();
  if (!(norm > 0.0) || !std::isfinite(norm)) fail(ErrorCode::ZeroFeature, "cannot normalize a zero or non-finite feature map");
  FeatureMap out = f;
  for (double& v : out.values()) v /= norm;
  return out;
}

FeatureMap circshift(const FeatureMap& f, int k) {
  FeatureMap out(f.width(), f.height(), f.channels());
  if (f.width() == 0) return out;
  for (int w = 0; w < f.width(); ++w) {
    auto src = f.column(wrap_index(static_cast<long long>(w) + k, f.width()));
    std::copy(src.begin(), src.end(), out.column(w).begin());
  }
  return out;
}

}  // namespace georeg
