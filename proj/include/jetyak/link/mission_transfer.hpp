#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "jetyak/autopilot/mission.hpp"
#include "jetyak/link/link_model.hpp"
#include "jetyak/link/messages.hpp"

namespace jetyak {

struct TransferConfig {
  double timeout = 1.0;  // s without progress before retrying
  int max_retries = 5;   // per item, and for the MissionCount handshake
};

// Shore side of a mission upload. Sends MissionCount followed by every item,
// then answers MissionRequests until the vehicle acknowledges.
class MissionSender {
 public:
  enum class State { Sending, Accepted, Failed };

  MissionSender(Mission mission, TransferConfig config = {});

  // Frames due at `now`: the initial burst on the first call, then
  // handshake retries after a silent timeout.
  std::vector<Message> poll(double now);
  // Handles a MissionRequest or MissionAck; returns frames to send.
  std::vector<Message> on_message(const Message& msg, double now);

  State state() const { return state_; }
  const Mission& mission() const { return mission_; }
  std::size_t data_frames_sent() const { return data_frames_; }
  std::size_t retransmissions() const { return retransmissions_; }

 private:
  MissionCountMsg count_msg() const;
  MissionItemMsg item_msg(std::size_t index) const;

  Mission mission_;
  TransferConfig config_;
  State state_ = State::Sending;
  bool started_ = false;
  double last_activity_ = 0.0;
  int handshake_retries_ = 0;
  std::vector<int> item_retries_;
  std::size_t data_frames_ = 0;
  std::size_t retransmissions_ = 0;
};

// Vehicle side. Buffers items for one mission at a time and only releases a
// mission once every item is held; partial transfers are discarded.
class MissionReceiver {
 public:
  explicit MissionReceiver(TransferConfig config = {});

  std::vector<Message> on_message(const Message& msg, double now);
  // Gap requests after a silent timeout; abandons stalled transfers.
  std::vector<Message> poll(double now);

  // Newly completed mission, handed out once.
  std::optional<Mission> take_completed();
  bool in_progress() const { return session_.has_value(); }

 private:
  struct Session {
    std::uint16_t id;
    GeoPoint home;
    std::vector<std::optional<Waypoint>> items;
    double last_activity;
    std::map<std::size_t, double> requested_at;
  };

  std::optional<std::size_t> lowest_missing() const;
  std::vector<Message> maybe_request(double now, bool force);

  TransferConfig config_;
  std::optional<Session> session_;
  std::optional<std::uint16_t> completed_id_;
  std::optional<Mission> completed_;
};

struct UploadReport {
  MissionAckMsg ack;
  std::size_t data_frames = 0;      // MissionCount + MissionItem frames sent by the shore side
  std::size_t retransmissions = 0;
  std::size_t frames_dropped = 0;   // both directions
  double elapsed = 0.0;
};

// Runs a complete upload across a simulated link pair at fixed time steps.
// The receiver is owned by the caller so its state (and any completed
// mission) outlives the call. Frames sent at or after `sever_at` are lost.
UploadReport simulate_upload(const Mission& mission, const LinkModel& link, Rng& rng,
                             MissionReceiver& receiver, std::optional<Mission>& onboard,
                             double distance = 100.0, std::optional<double> sever_at = std::nullopt,
                             TransferConfig config = {}, double dt = 0.05, double max_time = 60.0);

}  // namespace jetyak
