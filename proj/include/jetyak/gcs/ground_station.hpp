#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "jetyak/gcs/fleet.hpp"
#include "jetyak/gcs/stream_hub.hpp"
#include "jetyak/link/mission_transfer.hpp"
#include "jetyak/sensors/sample.hpp"
#include "jetyak/sim/simulation.hpp"

namespace jetyak {

using GcsCommand = std::variant<SetModeMsg, KillMsg, VelocitySetpointMsg>;

struct CommandResult {
  bool accepted = false;
  std::string code;    // stable machine-readable reason when rejected
  std::string reason;  // human-readable detail
};

enum class UploadState { Idle, InProgress, Accepted, Failed };

std::string_view to_string(UploadState s);

struct UploadStatus {
  UploadState state = UploadState::Idle;
  std::uint16_t mission_id = 0;
  bool activate = false;
  bool activation_sent = false;
  double started = 0.0;
  double finished = 0.0;
};

// Shore-side fleet manager. Not thread-safe; the owning session serializes
// access.
class GroundStation {
 public:
  GroundStation(ShoreLink& link, const std::vector<std::uint8_t>& sys_ids, double heartbeat_period = 1.0,
                TransferConfig transfer = {});

  // Drains delivered frames, advances mission uploads and emits the shore
  // heartbeat. Called once per tick before the vehicles step.
  void process();

  // Lost links reject SetMode and VelocitySetpoint; Kill is always attempted.
  CommandResult command(std::uint8_t sys_id, const GcsCommand& cmd);
  // Starts an upload; with `activate`, sends SetMode AUTO_WP_OFFBOARD after
  // the vehicle accepts the complete mission. Replaces any upload in flight.
  CommandResult start_upload(std::uint8_t sys_id, const Mission& mission, bool activate);
  UploadStatus upload_status(std::uint8_t sys_id) const;

  const FleetRegistry& fleet() const { return fleet_; }
  LinkState link_state(std::uint8_t sys_id) const { return fleet_.link_state(sys_id, link_.now()); }
  StreamHub& hub() { return hub_; }
  // Sensor reports received from the fleet, in arrival order.
  const std::vector<SensorSample>& samples() const { return samples_; }
  std::size_t sample_count(std::uint8_t sys_id, SensorKind kind) const;

  // Invoked for every Kill so the RC ch6 path can mirror it.
  void set_kill_mirror(std::function<void(std::uint8_t)> mirror) { kill_mirror_ = std::move(mirror); }

 private:
  struct Upload {
    std::unique_ptr<MissionSender> sender;
    UploadStatus status;
  };

  void send_all(std::uint8_t sys_id, const std::vector<Message>& msgs);
  void settle(std::uint8_t sys_id, Upload& up);

  ShoreLink& link_;
  FleetRegistry fleet_;
  TransferConfig transfer_;
  StreamHub hub_;
  std::map<std::uint8_t, Upload> uploads_;
  std::vector<SensorSample> samples_;
  std::map<std::pair<std::uint8_t, SensorKind>, std::size_t> sample_counts_;
  std::function<void(std::uint8_t)> kill_mirror_;
  double last_heartbeat_sent_ = -1e9;
};

}  // namespace jetyak
