#include "jetyak/world/geo.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "jetyak/world/angles.hpp"

namespace jetyak {

namespace {

constexpr double kMaxDeltaDeg = 1.0;

void require_valid(const GeoPoint& p) {
  if (!std::isfinite(p.lat) || !std::isfinite(p.lon) || p.lat < -90.0 || p.lat > 90.0 ||
      p.lon < -180.0 || p.lon > 180.0) {
    throw std::invalid_argument("geo point out of range: " + std::to_string(p.lat) + ", " +
                                std::to_string(p.lon));
  }
}

}  // namespace

GeoPoint make_geo(double lat, double lon) {
  GeoPoint p{lat, lon};
  require_valid(p);
  return p;
}

LocalPoint geo_to_local(const GeoPoint& origin, const GeoPoint& p) {
  require_valid(origin);
  require_valid(p);
  const double dlat = p.lat - origin.lat;
  const double dlon = p.lon - origin.lon;
  if (std::abs(dlat) >= kMaxDeltaDeg || std::abs(dlon) >= kMaxDeltaDeg) {
    throw std::domain_error("geo_to_local: point too far from origin for tangent-plane approximation");
  }
  const double k = deg_to_rad(1.0) * kEarthRadius;
  return {dlon * k * std::cos(deg_to_rad(origin.lat)), dlat * k};
}

GeoPoint local_to_geo(const GeoPoint& origin, const LocalPoint& p) {
  require_valid(origin);
  if (!p.allFinite()) throw std::invalid_argument("local_to_geo: non-finite local point");
  const double k = deg_to_rad(1.0) * kEarthRadius;
  const double dlat = p.y() / k;
  const double dlon = p.x() / (k * std::cos(deg_to_rad(origin.lat)));
  if (std::abs(dlat) >= kMaxDeltaDeg || std::abs(dlon) >= kMaxDeltaDeg) {
    throw std::domain_error("local_to_geo: point too far from origin for tangent-plane approximation");
  }
  return {origin.lat + dlat, origin.lon + dlon};
}

double bearing(const LocalPoint& from, const LocalPoint& to) {
  const LocalPoint d = to - from;
  return wrap_two_pi(std::atan2(d.x(), d.y()));
}

}  // namespace jetyak
