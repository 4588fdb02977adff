#pragma once

#include <span>
#include <vector>

namespace georeg {

/// Spatial feature tensor of shape (W, H_D, K_D). Storage is column-major on
/// the orientation axis: element (w, h, k) lives at (w * H_D + h) * K_D + k,
/// so one orientation column is a contiguous block of H_D * K_D values and a
/// circular shift along W is a block rotation.
class FeatureMap {
 public:
  FeatureMap() = default;
  FeatureMap(int width, int height, int channels, double fill = 0.0);
  FeatureMap(int width, int height, int channels, std::vector<double> data);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  int channels() const noexcept { return channels_; }
  /// Values per orientation column (H_D * K_D).
  int column_size() const noexcept { return height_ * channels_; }
  std::size_t size() const noexcept { return data_.size(); }

  double& at(int w, int h, int k) { return data_[index(w, h, k)]; }
  double at(int w, int h, int k) const { return data_[index(w, h, k)]; }

  std::span<double> column(int w) {
    return {data_.data() + static_cast<std::size_t>(w) * column_size(), static_cast<std::size_t>(column_size())};
  }
  std::span<const double> column(int w) const {
    return {data_.data() + static_cast<std::size_t>(w) * column_size(), static_cast<std::size_t>(column_size())};
  }

  std::span<double> values() noexcept { return data_; }
  std::span<const double> values() const noexcept { return data_; }

  double frobenius_norm() const noexcept;
  bool all_finite() const noexcept;
  bool same_shape(const FeatureMap& other) const noexcept {
    return width_ == other.width_ && height_ == other.height_ && channels_ == other.channels_;
  }

  bool operator==(const FeatureMap&) const = default;

 private:
  std::size_t index(int w, int h, int k) const noexcept {
    return (static_cast<std::size_t>(w) * height_ + h) * channels_ + k;
  }

  int width_ = 0;
  int height_ = 0;
  int channels_ = 0;
  std::vector<double> data_;
};

/// f / ||f||_F. Throws ZeroFeature when the norm is zero or not finite.
FeatureMap normalize(const FeatureMap& f);

/// out[w] = f[(w + k) mod W] for every column (left rotation by k).
FeatureMap circshift(const FeatureMap& f, int k);

}  // namespace georeg
