#pragma once

namespace georeg {

/// WGS-84 position in degrees.
struct GeoPoint {
  double latitude = 0.0;
  double longitude = 0.0;

  bool operator==(const GeoPoint&) const = default;
};

/// Local tangent-plane offset in meters (east, north).
struct EastNorth {
  double east = 0.0;
  double north = 0.0;
};

/// Camera geo-pose: position plus heading in degrees clockwise from north.
struct GeoPose {
  GeoPoint position;
  double heading_degrees = 0.0;
};

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kEarthRadiusMeters = 6378137.0;

bool is_valid(const GeoPoint& p) noexcept;

// Flat-earth (equirectangular about `origin`) conversions. Accurate to well
// under a centimeter over the few hundred meters a reference tile spans.
EastNorth to_local(const GeoPoint& origin, const GeoPoint& p) noexcept;
GeoPoint from_local(const GeoPoint& origin, const EastNorth& offset) noexcept;

double deg2rad(double degrees) noexcept;
double rad2deg(double radians) noexcept;

/// Wraps to [0, 360).
double wrap360(double degrees) noexcept;
/// Wraps to (-180, 180].
double wrap180(double degrees) noexcept;
/// Absolute difference on the circle, in [0, 180].
double angular_error(double a_degrees, double b_degrees) noexcept;

/// Wraps an integer index into [0, n).
inline int wrap_index(long long i, int n) noexcept {
  const long long m = i % n;
  return static_cast<int>(m < 0 ? m + n : m);
}

}  // namespace georeg
