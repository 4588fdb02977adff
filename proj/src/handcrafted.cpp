#include "georeg/handcrafted.hpp"

#include <cmath>
#include <string>

#include "georeg/error.hpp"
#include "georeg/geo.hpp"

namespace georeg {

FeatureMap extract_handcrafted(const Image& image, const HandcraftedConfig& config, bool circular_columns) {
  const int f = config.downsample;
  const int bins = config.orientation_bins;
  if (f < 1 || bins < 1) fail(ErrorCode::InvalidArgument, "downsample and bin count must be positive");
  const int w = image.width();
  const int h = image.height();
  if (w == 0 || h == 0 || w % f != 0 || h % f != 0)
    fail(ErrorCode::BadDimensions, "image " + std::to_string(w) + "x" + std::to_string(h) +
                                       " is not divisible by downsample factor " + std::to_string(f));

  FeatureMap out(w / f, h / f, bins + 1);
  const double bin_scale = bins / (2.0 * kPi);
  const double cell_area = static_cast<double>(f) * f;

  for (int y = 0; y < h; ++y) {
    auto row = image.row(y);
    auto up = image.row(y > 0 ? y - 1 : y);
    auto down = image.row(y + 1 < h ? y + 1 : y);
    const double gy_scale = (y > 0 && y + 1 < h) ? 0.5 : 1.0;
    const int cy = y / f;
    for (int x = 0; x < w; ++x) {
      int xl = x - 1;
      int xr = x + 1;
      double gx_scale = 0.5;
      if (circular_columns) {
        xl = wrap_index(xl, w);
        xr = wrap_index(xr, w);
      } else if (xl < 0 || xr >= w) {
        xl = xl < 0 ? x : xl;
        xr = xr >= w ? x : xr;
        gx_scale = (xl == xr) ? 0.0 : 1.0;
      }
      const double gx = (row[xr] - row[xl]) * gx_scale;
      const double gy = (down[x] - up[x]) * gy_scale;
      const double mag = std::sqrt(gx * gx + gy * gy);
      const int cx = x / f;
      double* cell = &out.at(cx, cy, 0);
      cell[bins] += row[x];
      if (mag == 0.0) continue;
      // Continuous bin coordinate; bin centers at integers, wrapping at 2*pi.
      double pos = (std::atan2(gy, gx) + kPi) * bin_scale - 0.5;
      if (pos < 0.0) pos += bins;
      const int b0 = static_cast<int>(pos) % bins;
      const double frac = pos - std::floor(pos);
      cell[b0] += mag * (1.0 - frac);
      cell[(b0 + 1) % bins] += mag * frac;
    }
  }
  for (double& v : out.values()) v /= cell_area;
  if (config.intensity_weight != 1.0)
    for (int cx = 0; cx < out.width(); ++cx)
      for (int cy = 0; cy < out.height(); ++cy) out.at(cx, cy, bins) *= config.intensity_weight;
  if (config.column_normalize)
    for (int cx = 0; cx < out.width(); ++cx) {
      auto col = out.column(cx);
      double sq = 0.0;
      for (double v : col) sq += v * v;
      if (sq == 0.0) continue;
      const double inv = 1.0 / std::sqrt(sq);
      for (double& v : col) v *= inv;
    }
  return out;
}

}  // namespace georeg
