#pragma once

#include <cstdint>
#include <variant>
#include <vector>

#include "jetyak/autopilot/mission.hpp"
#include "jetyak/autopilot/modes.hpp"
#include "jetyak/sensors/sample.hpp"
#include "jetyak/vehicle/vehicle.hpp"

namespace jetyak {

// Payload layouts are fixed little-endian; see docs/wire-protocol.md.

struct HeartbeatMsg {
  Mode mode = Mode::ManualRc;
  EngineStatus engine = EngineStatus::Running;
  bool armed = false;
  friend bool operator==(const HeartbeatMsg&, const HeartbeatMsg&) = default;
};

struct TelemetryMsg {
  GeoPoint geo;
  double psi = 0.0;
  double v_water = 0.0;
  double v_ground_east = 0.0;
  double v_ground_north = 0.0;
  double fuel = 0.0;
  double t = 0.0;
  friend bool operator==(const TelemetryMsg&, const TelemetryMsg&) = default;
};

struct SetModeMsg {
  Mode mode = Mode::ManualRc;
  friend bool operator==(const SetModeMsg&, const SetModeMsg&) = default;
};

struct KillMsg {
  friend bool operator==(const KillMsg&, const KillMsg&) = default;
};

struct MissionCountMsg {
  std::uint16_t count = 0;
  std::uint16_t mission_id = 0;
  GeoPoint home;
  friend bool operator==(const MissionCountMsg&, const MissionCountMsg&) = default;
};

struct MissionItemMsg {
  std::uint16_t mission_id = 0;
  std::uint16_t index = 0;
  Waypoint waypoint;
  friend bool operator==(const MissionItemMsg&, const MissionItemMsg&) = default;
};

enum class MissionStatus : std::uint8_t { Accepted = 0, Failed = 1 };

struct MissionAckMsg {
  std::uint16_t mission_id = 0;
  MissionStatus status = MissionStatus::Accepted;
  friend bool operator==(const MissionAckMsg&, const MissionAckMsg&) = default;
};

struct MissionRequestMsg {
  std::uint16_t mission_id = 0;
  std::uint16_t index = 0;
  friend bool operator==(const MissionRequestMsg&, const MissionRequestMsg&) = default;
};

struct VelocitySetpointMsg {
  double steering = 0.0;
  double speed = 0.0;
  friend bool operator==(const VelocitySetpointMsg&, const VelocitySetpointMsg&) = default;
};

inline constexpr std::size_t kMaxSensorValues = 27;

struct SensorReportMsg {
  SensorKind kind = SensorKind::Depth;
  SampleQuality quality = SampleQuality::Ok;
  double t = 0.0;
  GeoPoint pos;
  double psi = 0.0;
  std::vector<double> values;
  friend bool operator==(const SensorReportMsg&, const SensorReportMsg&) = default;
};

// Alternative index == msg_id on the wire.
using Message = std::variant<HeartbeatMsg, TelemetryMsg, SetModeMsg, KillMsg, MissionCountMsg,
                             MissionItemMsg, MissionAckMsg, MissionRequestMsg, VelocitySetpointMsg,
                             SensorReportMsg>;

inline std::uint8_t msg_id(const Message& m) { return static_cast<std::uint8_t>(m.index()); }

struct Frame {
  std::uint8_t seq = 0;
  std::uint8_t sys_id = 0;
  Message message;
  friend bool operator==(const Frame&, const Frame&) = default;
};

}  // namespace jetyak
