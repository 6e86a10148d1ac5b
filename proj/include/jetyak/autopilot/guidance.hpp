#pragma once

#include <cstddef>
#include <vector>

#include "jetyak/autopilot/mission.hpp"
#include "jetyak/autopilot/pid.hpp"
#include "jetyak/vehicle/vehicle.hpp"

namespace jetyak {

struct GuidanceConfig {
  double lookahead = 8.0;   // m, pure-pursuit distance along the active leg
  double speed_gain = 0.5;  // proportional speed loop gain
};

struct GuidanceOutput {
  Heading psi_des;
  double throttle = 0.0;  // fraction in [0, 1]
  bool done = false;
  std::size_t active_index = 0;
  std::vector<std::size_t> accepted;  // waypoints accepted this update
};

// Throttle fraction holding `speed` through the water: feed-forward plus a
// proportional correction.
double speed_loop(double speed, double v_water, double v_max, double gain);

// Pure-pursuit waypoint follower over a mission converted to the local frame.
class WaypointGuidance {
 public:
  WaypointGuidance() = default;
  // The first leg starts at `start`, normally the vehicle position when the
  // mission is activated.
  WaypointGuidance(const Mission& mission, const GeoPoint& origin, const LocalPoint& start);
  WaypointGuidance(std::vector<LocalPoint> waypoints, std::vector<double> speeds,
                   const LocalPoint& start);

  GuidanceOutput update(const VehicleState& state, const PidGains& gains,
                        const GuidanceConfig& config, double v_max);

  bool done() const { return active_ >= waypoints_.size(); }
  std::size_t active_index() const { return active_; }
  const std::vector<LocalPoint>& waypoints() const { return waypoints_; }
  const std::vector<double>& speeds() const { return speeds_; }
  const LocalPoint& start() const { return start_; }
  // Start of the active leg.
  LocalPoint leg_start() const;

 private:
  std::vector<LocalPoint> waypoints_;
  std::vector<double> speeds_;
  LocalPoint start_ = LocalPoint::Zero();
  std::size_t active_ = 0;
};

// Pure-pursuit target: the point `lookahead` meters past the projection of
// `pos` onto the segment a->b, clamped to b.
LocalPoint pursuit_point(const LocalPoint& a, const LocalPoint& b, const LocalPoint& pos,
                         double lookahead);

// Signed perpendicular distance from `pos` to the line a->b; positive to the
// right (starboard side when travelling a->b).
double cross_track_error(const LocalPoint& a, const LocalPoint& b, const LocalPoint& pos);

}  // namespace jetyak
