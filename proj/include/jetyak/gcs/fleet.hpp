#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string_view>
#include <vector>

#include "jetyak/link/messages.hpp"

namespace jetyak {

enum class LinkState { Connected, Degraded, Lost };

std::string_view to_string(LinkState s);

struct FleetEntry {
  std::uint8_t sys_id = 0;
  std::optional<double> last_heartbeat;  // shore receive time
  std::optional<HeartbeatMsg> heartbeat;
  std::optional<TelemetryMsg> telemetry;
  std::optional<std::uint16_t> active_mission;
  std::size_t frames = 0;

  // Seconds since the last heartbeat; infinite before the first one.
  double heartbeat_age(double now) const;
  // Degraded once the heartbeat is 1.5 periods old, so normal jitter does not
  // flap the state; Lost at three periods.
  LinkState link_state(double now, double heartbeat_period = 1.0) const;
};

// Vehicles known to the ground station. Frames from unregistered sys_ids
// are quarantined and counted, never applied.
class FleetRegistry {
 public:
  explicit FleetRegistry(double heartbeat_period = 1.0) : period_(heartbeat_period) {}

  void register_vehicle(std::uint8_t sys_id);
  // Applies one frame; returns false if the sender is unknown.
  bool update(const Frame& frame, double now);

  const FleetEntry* find(std::uint8_t sys_id) const;
  FleetEntry* find(std::uint8_t sys_id);
  std::vector<const FleetEntry*> entries() const;
  LinkState link_state(std::uint8_t sys_id, double now) const;
  std::size_t quarantined() const { return quarantined_; }
  double heartbeat_period() const { return period_; }

 private:
  double period_;
  std::map<std::uint8_t, FleetEntry> entries_;
  std::size_t quarantined_ = 0;
};

}  // namespace jetyak
