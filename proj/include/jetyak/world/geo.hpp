#pragma once

#include <Eigen/Core>

namespace jetyak {

inline constexpr double kEarthRadius = 6371000.0;

// WGS84 latitude/longitude in degrees.
struct GeoPoint {
  double lat = 0.0;
  double lon = 0.0;

  friend bool operator==(const GeoPoint&, const GeoPoint&) = default;
};

// Local tangent-plane coordinates: x = east, y = north, meters.
using LocalPoint = Eigen::Vector2d;

// Throws std::invalid_argument for lat/lon outside the WGS84 ranges.
GeoPoint make_geo(double lat, double lon);

// Equirectangular projection around `origin`. Valid within one degree of the
// origin in both axes; larger offsets throw std::domain_error.
LocalPoint geo_to_local(const GeoPoint& origin, const GeoPoint& p);
GeoPoint local_to_geo(const GeoPoint& origin, const LocalPoint& p);

// Bearing from `from` to `to`, radians clockwise from north in [0, 2pi).
double bearing(const LocalPoint& from, const LocalPoint& to);

}  // namespace jetyak
