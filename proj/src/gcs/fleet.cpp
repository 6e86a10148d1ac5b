#include "jetyak/gcs/fleet.hpp"

#include <limits>

namespace jetyak {

std::string_view to_string(LinkState s) {
  switch (s) {
    case LinkState::Connected: return "connected";
    case LinkState::Degraded: return "degraded";
    case LinkState::Lost: return "lost";
  }
  return "unknown";
}

double FleetEntry::heartbeat_age(double now) const {
  if (!last_heartbeat) return std::numeric_limits<double>::infinity();
  return now - *last_heartbeat;
}

LinkState FleetEntry::link_state(double now, double heartbeat_period) const {
  const double age = heartbeat_age(now);
  if (age >= 3.0 * heartbeat_period) return LinkState::Lost;
  if (age > 1.5 * heartbeat_period) return LinkState::Degraded;
  return LinkState::Connected;
}

void FleetRegistry::register_vehicle(std::uint8_t sys_id) {
  entries_.try_emplace(sys_id).first->second.sys_id = sys_id;
}

bool FleetRegistry::update(const Frame& frame, double now) {
  auto it = entries_.find(frame.sys_id);
  if (it == entries_.end()) {
    ++quarantined_;
    return false;
  }
  FleetEntry& e = it->second;
  ++e.frames;
  if (const auto* hb = std::get_if<HeartbeatMsg>(&frame.message)) {
    e.heartbeat = *hb;
    e.last_heartbeat = now;
  } else if (const auto* tm = std::get_if<TelemetryMsg>(&frame.message)) {
    e.telemetry = *tm;
  }
  return true;
}

const FleetEntry* FleetRegistry::find(std::uint8_t sys_id) const {
  auto it = entries_.find(sys_id);
  return it == entries_.end() ? nullptr : &it->second;
}

FleetEntry* FleetRegistry::find(std::uint8_t sys_id) {
  auto it = entries_.find(sys_id);
  return it == entries_.end() ? nullptr : &it->second;
}

std::vector<const FleetEntry*> FleetRegistry::entries() const {
  std::vector<const FleetEntry*> out;
  for (const auto& [id, e] : entries_) out.push_back(&e);
  return out;
}

LinkState FleetRegistry::link_state(std::uint8_t sys_id, double now) const {
  const FleetEntry* e = find(sys_id);
  return e ? e->link_state(now, period_) : LinkState::Lost;
}

}  // namespace jetyak
