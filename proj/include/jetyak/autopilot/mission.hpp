#pragma once

#include <cstdint>
#include <vector>

#include "jetyak/world/geo.hpp"

namespace jetyak {

struct Waypoint {
  GeoPoint target;
  double speed = 2.0;  // m/s through the water

  friend bool operator==(const Waypoint&, const Waypoint&) = default;
};

struct Mission {
  std::uint16_t id = 0;
  std::vector<Waypoint> waypoints;
  GeoPoint home;

  friend bool operator==(const Mission&, const Mission&) = default;
};

// Throws std::invalid_argument for an empty mission or invalid coordinates.
void validate(const Mission& mission);

}  // namespace jetyak
