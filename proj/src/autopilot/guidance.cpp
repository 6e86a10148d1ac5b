#include "jetyak/autopilot/guidance.hpp"

#include <algorithm>
#include <stdexcept>

namespace jetyak {

double speed_loop(double speed, double v_water, double v_max, double gain) {
  return std::clamp((speed + gain * (speed - v_water)) / v_max, 0.0, 1.0);
}

LocalPoint pursuit_point(const LocalPoint& a, const LocalPoint& b, const LocalPoint& pos,
                         double lookahead) {
  const Vector2 d = b - a;
  const double len = d.norm();
  if (len <= 0.0) return b;
  const Vector2 u = d / len;
  const double s = std::clamp(u.dot(pos - a), 0.0, len);
  return a + u * std::min(s + lookahead, len);
}

double cross_track_error(const LocalPoint& a, const LocalPoint& b, const LocalPoint& pos) {
  const Vector2 d = b - a;
  const double len = d.norm();
  if (len <= 0.0) return (pos - b).norm();
  const Vector2 right(d.y(), -d.x());
  return right.dot(pos - a) / len;
}

WaypointGuidance::WaypointGuidance(const Mission& mission, const GeoPoint& origin,
                                   const LocalPoint& start)
    : start_(start) {
  validate(mission);
  for (const Waypoint& wp : mission.waypoints) {
    waypoints_.push_back(geo_to_local(origin, wp.target));
    speeds_.push_back(wp.speed);
  }
}

WaypointGuidance::WaypointGuidance(std::vector<LocalPoint> waypoints, std::vector<double> speeds,
                                   const LocalPoint& start)
    : waypoints_(std::move(waypoints)), speeds_(std::move(speeds)), start_(start) {
  if (waypoints_.size() != speeds_.size()) {
    throw std::invalid_argument("WaypointGuidance: waypoint/speed count mismatch");
  }
}

LocalPoint WaypointGuidance::leg_start() const {
  return active_ == 0 ? start_ : waypoints_[std::min(active_, waypoints_.size()) - 1];
}

GuidanceOutput WaypointGuidance::update(const VehicleState& state, const PidGains& gains,
                                        const GuidanceConfig& config, double v_max) {
  GuidanceOutput out;
  while (active_ < waypoints_.size() && (state.pos - waypoints_[active_]).norm() <= gains.wp_radius) {
    out.accepted.push_back(active_);
    ++active_;
  }
  out.active_index = active_;
  if (done()) {
    out.done = true;
    out.psi_des = state.psi;
    out.throttle = 0.0;
    return out;
  }
  const LocalPoint target =
      pursuit_point(leg_start(), waypoints_[active_], state.pos, config.lookahead);
  out.psi_des = Heading(bearing(state.pos, target));
  out.throttle = speed_loop(speeds_[active_], state.v_water, v_max, config.speed_gain);
  return out;
}

}  // namespace jetyak
