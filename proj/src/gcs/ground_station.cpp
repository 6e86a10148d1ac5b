#include "jetyak/gcs/ground_station.hpp"

namespace jetyak {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

std::string describe(const GcsCommand& cmd) {
  return std::visit(Overloaded{
                        [](const SetModeMsg& m) { return "set_mode " + std::string(to_string(m.mode)); },
                        [](const KillMsg&) { return std::string("kill"); },
                        [](const VelocitySetpointMsg& m) {
                          return "velocity steering=" + std::to_string(m.steering) +
                                 " speed=" + std::to_string(m.speed);
                        },
                    },
                    cmd);
}

}  // namespace

std::string_view to_string(UploadState s) {
  switch (s) {
    case UploadState::Idle: return "idle";
    case UploadState::InProgress: return "in_progress";
    case UploadState::Accepted: return "accepted";
    case UploadState::Failed: return "failed";
  }
  return "unknown";
}

GroundStation::GroundStation(ShoreLink& link, const std::vector<std::uint8_t>& sys_ids, double heartbeat_period,
                             TransferConfig transfer)
    : link_(link), fleet_(heartbeat_period), transfer_(transfer) {
  for (std::uint8_t id : sys_ids) fleet_.register_vehicle(id);
}

void GroundStation::send_all(std::uint8_t sys_id, const std::vector<Message>& msgs) {
  for (const Message& m : msgs) link_.send(sys_id, m);
}

void GroundStation::settle(std::uint8_t sys_id, Upload& up) {
  if (up.status.state != UploadState::InProgress) return;
  const MissionSender::State s = up.sender->state();
  if (s == MissionSender::State::Sending) return;
  up.status.finished = link_.now();
  if (s == MissionSender::State::Failed) {
    up.status.state = UploadState::Failed;
    link_.log_command(sys_id, "upload failed mission " + std::to_string(up.status.mission_id));
    return;
  }
  up.status.state = UploadState::Accepted;
  if (FleetEntry* e = fleet_.find(sys_id)) e->active_mission = up.status.mission_id;
  link_.log_command(sys_id, "upload accepted mission " + std::to_string(up.status.mission_id));
  if (up.status.activate) {
    link_.log_command(sys_id, "set_mode AUTO_WP_OFFBOARD (activation)");
    link_.send(sys_id, SetModeMsg{Mode::AutoWpOffboard});
    up.status.activation_sent = true;
  }
}

void GroundStation::process() {
  const double now = link_.now();
  for (auto& [frame, bytes] : link_.receive()) {
    if (!fleet_.update(frame, now)) continue;
    hub_.publish(bytes);
    const std::uint8_t id = frame.sys_id;
    if (const auto* r = std::get_if<SensorReportMsg>(&frame.message)) {
      SensorSample s;
      s.t = r->t;
      s.sys_id = id;
      s.pos = r->pos;
      s.psi = r->psi;
      s.kind = r->kind;
      s.values = r->values;
      s.quality = r->quality;
      samples_.push_back(std::move(s));
      ++sample_counts_[{id, r->kind}];
      continue;
    }
    if (std::holds_alternative<MissionRequestMsg>(frame.message) ||
        std::holds_alternative<MissionAckMsg>(frame.message)) {
      auto it = uploads_.find(id);
      if (it != uploads_.end() && it->second.sender) {
        send_all(id, it->second.sender->on_message(frame.message, now));
        settle(id, it->second);
      }
    }
  }
  for (auto& [id, up] : uploads_) {
    if (up.status.state != UploadState::InProgress) continue;
    send_all(id, up.sender->poll(now));
    settle(id, up);
  }
  if (now - last_heartbeat_sent_ >= fleet_.heartbeat_period() - 1e-9) {
    last_heartbeat_sent_ = now;
    for (const FleetEntry* e : fleet_.entries()) link_.send(e->sys_id, HeartbeatMsg{Mode::ManualOnboard, EngineStatus::Running, false});
  }
}

CommandResult GroundStation::command(std::uint8_t sys_id, const GcsCommand& cmd) {
  if (!fleet_.find(sys_id)) return {false, "unknown_vehicle", "no vehicle with sys_id " + std::to_string(sys_id)};
  const LinkState ls = link_state(sys_id);
  const bool is_kill = std::holds_alternative<KillMsg>(cmd);
  if (is_kill) {
    link_.log_command(sys_id, describe(cmd));
    link_.send(sys_id, KillMsg{});
    if (kill_mirror_) kill_mirror_(sys_id);
    return {true, "", ls == LinkState::Lost ? "link lost; kill attempted" : ""};
  }
  if (ls == LinkState::Lost) {
    link_.log_command(sys_id, "rejected " + describe(cmd) + " (link lost)");
    return {false, "link_lost", "vehicle " + std::to_string(sys_id) + " link is lost"};
  }
  if (const auto* m = std::get_if<SetModeMsg>(&cmd); m && m->mode == Mode::ManualOnboard) {
    return {false, "mode_not_remote", "MANUAL_ONBOARD is only selectable with the onboard hardware switch"};
  }
  link_.log_command(sys_id, describe(cmd));
  std::visit([&](const auto& m) { link_.send(sys_id, m); }, cmd);
  return {true, "", ""};
}

CommandResult GroundStation::start_upload(std::uint8_t sys_id, const Mission& mission, bool activate) {
  if (!fleet_.find(sys_id)) return {false, "unknown_vehicle", "no vehicle with sys_id " + std::to_string(sys_id)};
  try {
    validate(mission);
  } catch (const std::exception& e) {
    return {false, "invalid_mission", e.what()};
  }
  Upload& up = uploads_[sys_id];
  up.sender = std::make_unique<MissionSender>(mission, transfer_);
  up.status = UploadStatus{UploadState::InProgress, mission.id, activate, false, link_.now(), 0.0};
  link_.log_command(sys_id, "upload mission " + std::to_string(mission.id) + " (" +
                                std::to_string(mission.waypoints.size()) + " waypoints)");
  send_all(sys_id, up.sender->poll(link_.now()));
  return {true, "", ""};
}

UploadStatus GroundStation::upload_status(std::uint8_t sys_id) const {
  auto it = uploads_.find(sys_id);
  return it == uploads_.end() ? UploadStatus{} : it->second.status;
}

std::size_t GroundStation::sample_count(std::uint8_t sys_id, SensorKind kind) const {
  auto it = sample_counts_.find({sys_id, kind});
  return it == sample_counts_.end() ? 0 : it->second;
}

}  // namespace jetyak
