#include "jetyak/link/mission_transfer.hpp"

#include <stdexcept>

#include "jetyak/link/codec.hpp"

namespace jetyak {

MissionSender::MissionSender(Mission mission, TransferConfig config)
    : mission_(std::move(mission)), config_(config) {
  validate(mission_);
  if (mission_.waypoints.size() > 0xFFFF) throw std::invalid_argument("mission too long");
  item_retries_.assign(mission_.waypoints.size(), 0);
}

MissionCountMsg MissionSender::count_msg() const {
  return {static_cast<std::uint16_t>(mission_.waypoints.size()), mission_.id, mission_.home};
}

MissionItemMsg MissionSender::item_msg(std::size_t index) const {
  return {mission_.id, static_cast<std::uint16_t>(index), mission_.waypoints[index]};
}

std::vector<Message> MissionSender::poll(double now) {
  std::vector<Message> out;
  if (state_ != State::Sending) return out;
  if (!started_) {
    started_ = true;
    last_activity_ = now;
    out.emplace_back(count_msg());
    for (std::size_t k = 0; k < mission_.waypoints.size(); ++k) out.emplace_back(item_msg(k));
    data_frames_ += out.size();
    return out;
  }
  if (now - last_activity_ >= config_.timeout) {
    if (++handshake_retries_ > config_.max_retries) {
      state_ = State::Failed;
      return out;
    }
    last_activity_ = now;
    out.emplace_back(count_msg());
    ++data_frames_;
    ++retransmissions_;
  }
  return out;
}

std::vector<Message> MissionSender::on_message(const Message& msg, double now) {
  std::vector<Message> out;
  if (state_ != State::Sending) return out;
  if (const auto* req = std::get_if<MissionRequestMsg>(&msg)) {
    if (req->mission_id != mission_.id || req->index >= mission_.waypoints.size()) return out;
    last_activity_ = now;
    handshake_retries_ = 0;
    if (++item_retries_[req->index] > config_.max_retries) {
      state_ = State::Failed;
      return out;
    }
    out.emplace_back(item_msg(req->index));
    ++data_frames_;
    ++retransmissions_;
  } else if (const auto* ack = std::get_if<MissionAckMsg>(&msg)) {
    if (ack->mission_id != mission_.id) return out;
    state_ = ack->status == MissionStatus::Accepted ? State::Accepted : State::Failed;
  }
  return out;
}

MissionReceiver::MissionReceiver(TransferConfig config) : config_(config) {}

std::optional<std::size_t> MissionReceiver::lowest_missing() const {
  if (!session_) return std::nullopt;
  for (std::size_t k = 0; k < session_->items.size(); ++k) {
    if (!session_->items[k]) return k;
  }
  return std::nullopt;
}

std::vector<Message> MissionReceiver::maybe_request(double now, bool force) {
  std::vector<Message> out;
  const auto missing = lowest_missing();
  if (!missing) return out;
  auto it = session_->requested_at.find(*missing);
  if (!force && it != session_->requested_at.end() && now - it->second < config_.timeout) return out;
  session_->requested_at[*missing] = now;
  out.emplace_back(MissionRequestMsg{session_->id, static_cast<std::uint16_t>(*missing)});
  return out;
}

std::vector<Message> MissionReceiver::on_message(const Message& msg, double now) {
  std::vector<Message> out;
  if (const auto* count = std::get_if<MissionCountMsg>(&msg)) {
    if (completed_id_ && *completed_id_ == count->mission_id && !session_) {
      out.emplace_back(MissionAckMsg{count->mission_id, MissionStatus::Accepted});
      return out;
    }
    if (count->count == 0) {
      out.emplace_back(MissionAckMsg{count->mission_id, MissionStatus::Failed});
      return out;
    }
    if (session_ && session_->id == count->mission_id) {
      // Repeated handshake: the shore side heard nothing from us, so ask for
      // the first gap straight away.
      session_->last_activity = now;
      return maybe_request(now, true);
    }
    session_ = Session{count->mission_id, count->home,
                       std::vector<std::optional<Waypoint>>(count->count), now, {}};
    return out;
  }
  if (const auto* item = std::get_if<MissionItemMsg>(&msg)) {
    if (!session_ || session_->id != item->mission_id || item->index >= session_->items.size()) {
      return out;
    }
    const bool was_requested = session_->requested_at.count(item->index) > 0;
    session_->items[item->index] = item->waypoint;
    session_->last_activity = now;
    const auto missing = lowest_missing();
    if (!missing) {
      Mission m;
      m.id = session_->id;
      m.home = session_->home;
      for (const auto& wp : session_->items) m.waypoints.push_back(*wp);
      completed_id_ = m.id;
      completed_ = std::move(m);
      session_.reset();
      out.emplace_back(MissionAckMsg{*completed_id_, MissionStatus::Accepted});
      return out;
    }
    // A gap behind this item, or a retransmission we asked for: chase the
    // next gap without waiting for the timeout.
    if (item->index > *missing || was_requested) return maybe_request(now, false);
  }
  return out;
}

std::vector<Message> MissionReceiver::poll(double now) {
  std::vector<Message> out;
  if (!session_) return out;
  const double idle = now - session_->last_activity;
  if (idle >= config_.timeout * (config_.max_retries + 2)) {
    session_.reset();
    return out;
  }
  if (idle >= config_.timeout) {
    const auto missing = lowest_missing();
    auto it = missing ? session_->requested_at.find(*missing) : session_->requested_at.end();
    if (missing && (it == session_->requested_at.end() || now - it->second >= config_.timeout)) {
      return maybe_request(now, true);
    }
  }
  return out;
}

std::optional<Mission> MissionReceiver::take_completed() {
  std::optional<Mission> out;
  out.swap(completed_);
  return out;
}

UploadReport simulate_upload(const Mission& mission, const LinkModel& link, Rng& rng,
                             MissionReceiver& receiver, std::optional<Mission>& onboard,
                             double distance, std::optional<double> sever_at,
                             TransferConfig config, double dt, double max_time) {
  LinkChannel up(link, rng.fork(1));
  LinkChannel down(link, rng.fork(2));
  MissionSender sender(mission, config);
  UploadReport report;
  std::uint8_t seq_up = 0;
  std::uint8_t seq_down = 0;
  StreamDecoder up_rx;
  StreamDecoder down_rx;

  double now = 0.0;
  auto send = [&](LinkChannel& ch, std::uint8_t& seq, const std::vector<Message>& msgs) {
    for (const Message& m : msgs) {
      if (sever_at && now >= *sever_at) ch.set_severed(true);
      ch.send(encode(m, seq++, 1), now, distance);
    }
  };

  for (; now <= max_time; now += dt) {
    send(up, seq_up, sender.poll(now));
    for (auto& bytes : up.receive(now)) {
      up_rx.feed(bytes);
      while (auto f = up_rx.next()) send(down, seq_down, receiver.on_message(f->message, now));
    }
    send(down, seq_down, receiver.poll(now));
    if (auto m = receiver.take_completed()) onboard = std::move(m);
    for (auto& bytes : down.receive(now)) {
      down_rx.feed(bytes);
      while (auto f = down_rx.next()) send(up, seq_up, sender.on_message(f->message, now));
    }
    if (sender.state() != MissionSender::State::Sending) break;
  }
  report.ack.mission_id = mission.id;
  report.ack.status = sender.state() == MissionSender::State::Accepted ? MissionStatus::Accepted
                                                                        : MissionStatus::Failed;
  report.data_frames = sender.data_frames_sent();
  report.retransmissions = sender.retransmissions();
  report.frames_dropped = up.dropped() + down.dropped();
  report.elapsed = now;
  return report;
}

}  // namespace jetyak
