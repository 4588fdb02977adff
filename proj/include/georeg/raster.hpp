#pragma once

#include <filesystem>
#include <optional>

#include "georeg/geo.hpp"
#include "georeg/image.hpp"

namespace georeg {

struct GeoReference {
  GeoPoint center;  // geo-location of the raster's geometric center
  double meters_per_pixel = 1.0;
};

/// Geo-referenced aerial raster: north-up image plus optional georeference.
/// Pixel (x, y) sits at east = (x - (W-1)/2) * mpp, north = ((H-1)/2 - y) * mpp
/// from the center.
struct GeoRaster {
  Image image;
  std::optional<GeoReference> georef;
};

/// Continuous pixel coordinates of a geo-location (pixel centers on integers).
struct PixelCoord {
  double x = 0.0;
  double y = 0.0;
};

PixelCoord to_pixel(const GeoRaster& raster, const GeoPoint& p);
GeoPoint to_geo(const GeoRaster& raster, const PixelCoord& px);

/// Writes `<stem>.pgm` plus the JSON sidecar `<stem>.json`
/// {center_lat, center_lon, meters_per_pixel, width_px, height_px}.
void save_geo_raster(const std::filesystem::path& image_path, const GeoRaster& raster);

/// Loads an image and its sidecar (same path with extension `.json`). A
/// missing sidecar leaves `georef` empty; a sidecar whose size disagrees
/// with the image is rejected.
GeoRaster load_geo_raster(const std::filesystem::path& image_path);

std::filesystem::path sidecar_path(const std::filesystem::path& image_path);

}  // namespace georeg
