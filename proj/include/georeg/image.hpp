#pragma once

#include <filesystem>
#include <span>
#include <vector>

namespace georeg {

/// Single-channel image with intensities nominally in [0, 1], row-major.
class Image {
 public:
  Image() = default;
  Image(int width, int height, double fill = 0.0);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  bool empty() const noexcept { return pixels_.empty(); }

  double& at(int x, int y) { return pixels_[static_cast<size_t>(y) * width_ + x]; }
  double at(int x, int y) const { return pixels_[static_cast<size_t>(y) * width_ + x]; }

  std::span<double> row(int y) { return {pixels_.data() + static_cast<size_t>(y) * width_, static_cast<size_t>(width_)}; }
  std::span<const double> row(int y) const {
    return {pixels_.data() + static_cast<size_t>(y) * width_, static_cast<size_t>(width_)};
  }

  std::span<double> pixels() noexcept { return pixels_; }
  std::span<const double> pixels() const noexcept { return pixels_; }

  bool operator==(const Image&) const = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<double> pixels_;
};

/// Bilinear sample at continuous pixel coordinates (pixel centers on
/// integers); coordinates outside the image are clamped to the border.
double sample_bilinear(const Image& image, double x, double y) noexcept;

/// Circular column rotation: out(x, y) = in((x + k) mod W, y).
Image shift_columns(const Image& image, int k);

/// Columns [start, start + width) with circular wrap.
Image column_window(const Image& image, int start, int width);

/// 8-bit binary PGM (P5). Values are clamped to [0, 1] and rounded to 1/255.
void write_pgm(const std::filesystem::path& path, const Image& image);
Image read_pgm(const std::filesystem::path& path);

/// Rounds every pixel to the nearest 1/255 step so an image survives a PGM
/// round trip unchanged.
void quantize_8bit(Image& image) noexcept;

}  // namespace georeg
