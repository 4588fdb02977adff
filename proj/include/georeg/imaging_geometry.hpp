#pragma once

#include "georeg/geo.hpp"
#include "georeg/image.hpp"
#include "georeg/raster.hpp"

namespace georeg {

/// Ground footprint of a reference tile; matches the CVACT aerial coverage.
inline constexpr double kDefaultCoverageMeters = 144.0;

/// Square north-up crop of the aerial raster centered on a query location.
struct AerialTile {
  Image pixels;
  GeoPoint center;
  double meters_per_pixel = 1.0;
  double side_meters = 0.0;
};

/// Reference tile resampled into (bearing, radius) coordinates. Column c looks
/// along bearing 360*c/W clockwise from north; row r samples ground distance
/// (r + 0.5) / H of the tile half-side, so row 0 is nearest the center.
struct PolarImage {
  Image pixels;
  int north_column = 0;
};

/// Geometry shared by reference preparation and ground rendering.
struct GeometryConfig {
  double coverage_meters = kDefaultCoverageMeters;
  int tile_pixels = 0;  // 0 = native resolution, coverage / meters_per_pixel
  int polar_width = 512;
  int polar_height = 128;
};

AerialTile crop_reference_tile(const GeoRaster& world, const GeoPoint& center,
                               double coverage_meters = kDefaultCoverageMeters, int tile_pixels = 0);

PolarImage polar_transform(const AerialTile& tile, int out_width, int out_height);

/// Number of panorama columns spanned by a camera field of view.
int fov_to_width(double fov_degrees, int panorama_width);

/// crop_reference_tile followed by polar_transform with the configured sizes.
PolarImage reference_polar(const GeoRaster& world, const GeoPoint& center, const GeometryConfig& geometry);

}  // namespace georeg
