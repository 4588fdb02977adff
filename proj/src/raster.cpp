#include "georeg/raster.hpp"

#include <fstream>
#include <json.hpp>

#include "georeg/error.hpp"

namespace georeg {

namespace {

const GeoReference& require_georef(const GeoRaster& raster) {
  if (!raster.georef || !(raster.georef->meters_per_pixel > 0.0))
    fail(ErrorCode::MissingGeoreference, "raster has no meters-per-pixel georeference");
  return *raster.georef;
}

}  // namespace

PixelCoord to_pixel(const GeoRaster& raster, const GeoPoint& p) {
  const GeoReference& g = require_georef(raster);
  const EastNorth en = to_local(g.center, p);
  return {(raster.image.width() - 1) * 0.5 + en.east / g.meters_per_pixel,
          (raster.image.height() - 1) * 0.5 - en.north / g.meters_per_pixel};
}

GeoPoint to_geo(const GeoRaster& raster, const PixelCoord& px) {
  const GeoReference& g = require_georef(raster);
  return from_local(g.center, {(px.x - (raster.image.width() - 1) * 0.5) * g.meters_per_pixel,
                               ((raster.image.height() - 1) * 0.5 - px.y) * g.meters_per_pixel});
}

std::filesystem::path sidecar_path(const std::filesystem::path& image_path) {
  std::filesystem::path p = image_path;
  p.replace_extension(".json");
  return p;
}

void save_geo_raster(const std::filesystem::path& image_path, const GeoRaster& raster) {
  const GeoReference& g = require_georef(raster);
  write_pgm(image_path, raster.image);
  nlohmann::json j;
  j["center_lat"] = g.center.latitude;
  j["center_lon"] = g.center.longitude;
  j["meters_per_pixel"] = g.meters_per_pixel;
  j["width_px"] = raster.image.width();
  j["height_px"] = raster.image.height();
  std::ofstream out(sidecar_path(image_path));
  if (!out) fail(ErrorCode::Io, "cannot write sidecar for " + image_path.string());
  out << j.dump(2) << "\n";
}

GeoRaster load_geo_raster(const std::filesystem::path& image_path) {
  GeoRaster raster;
  raster.image = read_pgm(image_path);
  const auto side = sidecar_path(image_path);
  if (!std::filesystem::exists(side)) return raster;
  std::ifstream in(side);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::Io, "bad sidecar " + side.string() + ": " + e.what());
  }
  if (!j.contains("meters_per_pixel") || !j.contains("center_lat") || !j.contains("center_lon")) return raster;
  if (j.value("width_px", raster.image.width()) != raster.image.width() ||
      j.value("height_px", raster.image.height()) != raster.image.height())
    fail(ErrorCode::BadDimensions, "sidecar size disagrees with " + image_path.string());
  raster.georef = GeoReference{{j["center_lat"].get<double>(), j["center_lon"].get<double>()},
                               j["meters_per_pixel"].get<double>()};
  return raster;
}

}  // namespace georeg
