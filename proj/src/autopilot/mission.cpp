#include "jetyak/autopilot/mission.hpp"

#include <cmath>
#include <stdexcept>

namespace jetyak {

void validate(const Mission& mission) {
  if (mission.waypoints.empty()) throw std::invalid_argument("mission has no waypoints");
  make_geo(mission.home.lat, mission.home.lon);
  for (const Waypoint& wp : mission.waypoints) {
    make_geo(wp.target.lat, wp.target.lon);
    if (!(std::isfinite(wp.speed) && wp.speed >= 0.0)) {
      throw std::invalid_argument("waypoint speed must be finite and >= 0");
    }
  }
}

}  // namespace jetyak
