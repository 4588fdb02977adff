#include "georeg/imaging_geometry.hpp"

#include <cmath>
#include <string>
#include <vector>

#include "georeg/error.hpp"

namespace georeg {

namespace {

double snap_to_integer(double v) {
  const double r = std::round(v);
  return std::fabs(v - r) < 1e-6 ? r : v;
}

}  // namespace

AerialTile crop_reference_tile(const GeoRaster& world, const GeoPoint& center, double coverage_meters,
                               int tile_pixels) {
  if (!world.georef || !(world.georef->meters_per_pixel > 0.0))
    fail(ErrorCode::MissingGeoreference, "world raster carries no meters-per-pixel metadata");
  if (!(coverage_meters > 0.0)) fail(ErrorCode::InvalidArgument, "coverage must be positive");
  const double mpp = world.georef->meters_per_pixel;
  const double native = coverage_meters / mpp;  // crop side in source pixels
  const int side = tile_pixels > 0 ? tile_pixels : static_cast<int>(std::lround(native));
  if (side < 1) fail(ErrorCode::InvalidArgument, "coverage smaller than one pixel");

  const PixelCoord c = to_pixel(world, center);
  const double half = native * 0.5;
  constexpr double kSlack = 1e-6;
  if (c.x - half < -0.5 - kSlack || c.y - half < -0.5 - kSlack || c.x + half > world.image.width() - 0.5 + kSlack ||
      c.y + half > world.image.height() - 0.5 + kSlack)
    fail(ErrorCode::OutOfBounds, "tile of " + std::to_string(coverage_meters) + " m does not fit inside the world raster");

  const double step = native / side;
  const double x0 = snap_to_integer(c.x - (side - 1) * 0.5 * step);
  const double y0 = snap_to_integer(c.y - (side - 1) * 0.5 * step);

  AerialTile tile;
  tile.pixels = Image(side, side);
  tile.center = center;
  tile.meters_per_pixel = coverage_meters / side;
  tile.side_meters = coverage_meters;

  const bool integral = step == 1.0 && x0 == std::floor(x0) && y0 == std::floor(y0) && x0 >= 0 && y0 >= 0 &&
                        x0 + side <= world.image.width() && y0 + side <= world.image.height();
  if (integral) {
    const int ix = static_cast<int>(x0);
    const int iy = static_cast<int>(y0);
    for (int v = 0; v < side; ++v) {
      auto src = world.image.row(iy + v);
      auto dst = tile.pixels.row(v);
      for (int u = 0; u < side; ++u) dst[u] = src[ix + u];
    }
    return tile;
  }
  for (int v = 0; v < side; ++v)
    for (int u = 0; u < side; ++u) tile.pixels.at(u, v) = sample_bilinear(world.image, x0 + u * step, y0 + v * step);
  return tile;
}

PolarImage polar_transform(const AerialTile& tile, int out_width, int out_height) {
  const int n = tile.pixels.width();
  if (n < 2 || tile.pixels.height() < 2) fail(ErrorCode::DegenerateTile, "tile smaller than 2x2");
  if (tile.pixels.height() != n) fail(ErrorCode::DegenerateTile, "tile is not square");
  if (out_width < 4 || out_height < 1) fail(ErrorCode::BadDimensions, "polar output must be at least 4x1");

  const double c = (n - 1) * 0.5;
  const double max_radius = n * 0.5;
  std::vector<double> sin_b(out_width), cos_b(out_width);
  for (int col = 0; col < out_width; ++col) {
    const double bearing = 2.0 * kPi * col / out_width;
    sin_b[col] = std::sin(bearing);
    cos_b[col] = std::cos(bearing);
  }
  PolarImage polar;
  polar.pixels = Image(out_width, out_height);
  for (int r = 0; r < out_height; ++r) {
    const double radius = max_radius * (r + 0.5) / out_height;
    auto dst = polar.pixels.row(r);
    for (int col = 0; col < out_width; ++col)
      dst[col] = sample_bilinear(tile.pixels, c + radius * sin_b[col], c - radius * cos_b[col]);
  }
  return polar;
}

int fov_to_width(double fov_degrees, int panorama_width) {
  if (!(fov_degrees > 0.0) || fov_degrees > 360.0) fail(ErrorCode::InvalidFov, "field of view must lie in (0, 360]");
  if (panorama_width < 1) fail(ErrorCode::BadDimensions, "panorama width must be positive");
  const long w = std::lround(panorama_width * fov_degrees / 360.0);
  return static_cast<int>(std::max(1L, w));
}

PolarImage reference_polar(const GeoRaster& world, const GeoPoint& center, const GeometryConfig& geometry) {
  return polar_transform(crop_reference_tile(world, center, geometry.coverage_meters, geometry.tile_pixels),
                         geometry.polar_width, geometry.polar_height);
}

}  // namespace georeg
