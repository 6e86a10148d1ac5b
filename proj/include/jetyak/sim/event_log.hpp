#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <variant>
#include <vector>

#include "jetyak/world/frames.hpp"

namespace jetyak {

// Binary session log: an 8-byte magic followed by self-delimiting records
// (u32 length of type+payload, u8 type, payload), all little-endian. See
// docs/file-formats.md.

struct SessionStartRec {
  std::uint64_t seed = 0;
  double dt = 0.05;
  double origin_lat = 0.0;
  double origin_lon = 0.0;
  std::string name;
  friend bool operator==(const SessionStartRec&, const SessionStartRec&) = default;
};

struct VehicleStateRec {
  double t = 0.0;
  std::uint8_t sys_id = 0;
  double x = 0.0;
  double y = 0.0;
  double psi = 0.0;
  double v_water = 0.0;
  double vg_east = 0.0;
  double vg_north = 0.0;
  double fuel = 0.0;
  std::uint8_t engine = 0;
  std::uint8_t mode = 0;
  std::uint32_t active_index = 0;
  friend bool operator==(const VehicleStateRec&, const VehicleStateRec&) = default;
};

enum class LinkDirection : std::uint8_t { Up = 0, Down = 1 };

struct FrameSentRec {
  double t = 0.0;
  std::uint8_t sys_id = 0;
  LinkDirection direction = LinkDirection::Up;
  bool delivered = false;
  std::vector<std::uint8_t> bytes;
  friend bool operator==(const FrameSentRec&, const FrameSentRec&) = default;
};

struct FrameReceivedGcsRec {
  double t = 0.0;
  std::uint8_t sys_id = 0;
  std::vector<std::uint8_t> bytes;
  friend bool operator==(const FrameReceivedGcsRec&, const FrameReceivedGcsRec&) = default;
};

struct WaypointReachedRec {
  double t = 0.0;
  std::uint8_t sys_id = 0;
  std::uint32_t index = 0;
  friend bool operator==(const WaypointReachedRec&, const WaypointReachedRec&) = default;
};

struct MissionActivatedRec {
  double t = 0.0;
  std::uint8_t sys_id = 0;
  std::uint16_t mission_id = 0;
  double wp_radius = 5.0;
  double start_x = 0.0;
  double start_y = 0.0;
  std::vector<double> xy;  // waypoint coordinates, local frame, interleaved
  friend bool operator==(const MissionActivatedRec&, const MissionActivatedRec&) = default;
};

struct CommandRec {
  double t = 0.0;
  std::uint8_t sys_id = 0;
  std::string text;
  friend bool operator==(const CommandRec&, const CommandRec&) = default;
};

struct SessionEndRec {
  double t = 0.0;
  friend bool operator==(const SessionEndRec&, const SessionEndRec&) = default;
};

// Alternative index == record type byte.
using LogRecord = std::variant<SessionStartRec, VehicleStateRec, FrameSentRec, FrameReceivedGcsRec,
                               WaypointReachedRec, MissionActivatedRec, CommandRec, SessionEndRec>;

inline constexpr char kEventLogMagic[8] = {'J', 'Y', 'L', 'O', 'G', '0', '1', '\n'};

std::vector<std::uint8_t> serialize_record(const LogRecord& record);

class EventLogWriter {
 public:
  // Writes the magic immediately. The stream must outlive the writer.
  explicit EventLogWriter(std::ostream& out);
  void write(const LogRecord& record);
  std::size_t records() const { return records_; }

 private:
  std::ostream& out_;
  std::size_t records_ = 0;
};

struct EventLogContents {
  std::vector<LogRecord> records;
  bool truncated = false;  // trailing partial record ignored
  std::string warning;
};

// Reads every complete record. A truncated or corrupt tail stops reading
// with a warning; a bad magic throws std::runtime_error.
EventLogContents read_event_log(std::istream& in);

}  // namespace jetyak
