#include "georeg/geo.hpp"

#include <cmath>

namespace georeg {

bool is_valid(const GeoPoint& p) noexcept {
  return std::isfinite(p.latitude) && std::isfinite(p.longitude) && p.latitude >= -90.0 &&
         p.latitude <= 90.0 && p.longitude >= -180.0 && p.longitude <= 180.0;
}

double deg2rad(double degrees) noexcept { return degrees * kPi / 180.0; }
double rad2deg(double radians) noexcept { return radians * 180.0 / kPi; }

EastNorth to_local(const GeoPoint& origin, const GeoPoint& p) noexcept {
  const double cos_lat = std::cos(deg2rad(origin.latitude));
  return {deg2rad(p.longitude - origin.longitude) * kEarthRadiusMeters * cos_lat,
          deg2rad(p.latitude - origin.latitude) * kEarthRadiusMeters};
}

GeoPoint from_local(const GeoPoint& origin, const EastNorth& offset) noexcept {
  const double cos_lat = std::cos(deg2rad(origin.latitude));
  return {origin.latitude + rad2deg(offset.north / kEarthRadiusMeters),
          origin.longitude + rad2deg(offset.east / (kEarthRadiusMeters * cos_lat))};
}

double wrap360(double degrees) noexcept {
  double w = std::fmod(degrees, 360.0);
  if (w < 0.0) w += 360.0;
  if (w >= 360.0) w -= 360.0;  // fmod of tiny negatives can round up to 360
  return w;
}

double wrap180(double degrees) noexcept {
  double w = wrap360(degrees);
  if (w > 180.0) w -= 360.0;
  return w;
}

double angular_error(double a_degrees, double b_degrees) noexcept {
  return std::fabs(wrap180(a_degrees - b_degrees));
}

}  // namespace georeg
