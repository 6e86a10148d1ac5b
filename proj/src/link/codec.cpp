#include "jetyak/link/codec.hpp"

#include <bit>
#include <stdexcept>

#include "jetyak/link/crc16.hpp"

namespace jetyak {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

class Writer {
 public:
  explicit Writer(std::vector<std::uint8_t>& out) : out_(out) {}

  void u8(std::uint8_t v) { out_.push_back(v); }
  void u16(std::uint16_t v) {
    out_.push_back(static_cast<std::uint8_t>(v & 0xFF));
    out_.push_back(static_cast<std::uint8_t>(v >> 8));
  }
  void f64(double v) {
    const auto bits = std::bit_cast<std::uint64_t>(v);
    for (int k = 0; k < 8; ++k) out_.push_back(static_cast<std::uint8_t>(bits >> (8 * k)));
  }

 private:
  std::vector<std::uint8_t>& out_;
};

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> in) : in_(in) {}

  std::uint8_t u8() { return in_[pos_++]; }
  std::uint16_t u16() {
    const auto v = static_cast<std::uint16_t>(in_[pos_] | (in_[pos_ + 1] << 8));
    pos_ += 2;
    return v;
  }
  double f64() {
    std::uint64_t bits = 0;
    for (int k = 0; k < 8; ++k) bits |= static_cast<std::uint64_t>(in_[pos_ + k]) << (8 * k);
    pos_ += 8;
    return std::bit_cast<double>(bits);
  }

 private:
  std::span<const std::uint8_t> in_;
  std::size_t pos_ = 0;
};

void write_payload(Writer& w, const Message& m) {
  std::visit(Overloaded{
                 [&](const HeartbeatMsg& v) {
                   w.u8(static_cast<std::uint8_t>(v.mode));
                   w.u8(static_cast<std::uint8_t>(v.engine));
                   w.u8(v.armed ? 1 : 0);
                 },
                 [&](const TelemetryMsg& v) {
                   w.f64(v.geo.lat);
                   w.f64(v.geo.lon);
                   w.f64(v.psi);
                   w.f64(v.v_water);
                   w.f64(v.v_ground_east);
                   w.f64(v.v_ground_north);
                   w.f64(v.fuel);
                   w.f64(v.t);
                 },
                 [&](const SetModeMsg& v) { w.u8(static_cast<std::uint8_t>(v.mode)); },
                 [&](const KillMsg&) {},
                 [&](const MissionCountMsg& v) {
                   w.u16(v.count);
                   w.u16(v.mission_id);
                   w.f64(v.home.lat);
                   w.f64(v.home.lon);
                 },
                 [&](const MissionItemMsg& v) {
                   w.u16(v.mission_id);
                   w.u16(v.index);
                   w.f64(v.waypoint.target.lat);
                   w.f64(v.waypoint.target.lon);
                   w.f64(v.waypoint.speed);
                 },
                 [&](const MissionAckMsg& v) {
                   w.u16(v.mission_id);
                   w.u8(static_cast<std::uint8_t>(v.status));
                 },
                 [&](const MissionRequestMsg& v) {
                   w.u16(v.mission_id);
                   w.u16(v.index);
                 },
                 [&](const VelocitySetpointMsg& v) {
                   w.f64(v.steering);
                   w.f64(v.speed);
                 },
                 [&](const SensorReportMsg& v) {
                   if (v.values.size() > kMaxSensorValues) {
                     throw std::length_error("SensorReport carries too many values");
                   }
                   w.u8(static_cast<std::uint8_t>(v.kind));
                   w.u8(static_cast<std::uint8_t>(v.quality));
                   w.u8(static_cast<std::uint8_t>(v.values.size()));
                   w.f64(v.t);
                   w.f64(v.pos.lat);
                   w.f64(v.pos.lon);
                   w.f64(v.psi);
                   for (double x : v.values) w.f64(x);
                 },
             },
             m);
}

// Fixed payload sizes by msg_id; SensorReport is variable (-1).
constexpr int kPayloadSize[] = {3, 64, 1, 0, 20, 28, 3, 4, 16, -1};
constexpr std::size_t kSensorHeader = 35;

bool valid_mode(std::uint8_t v) { return v <= static_cast<std::uint8_t>(Mode::VelocityControl); }

std::variant<Message, DecodeError> read_payload(std::uint8_t id, std::span<const std::uint8_t> p) {
  if (id > 9) return DecodeError::UnknownMsg;
  if (kPayloadSize[id] >= 0 && p.size() != static_cast<std::size_t>(kPayloadSize[id])) {
    return DecodeError::BadLength;
  }
  Reader r(p);
  switch (id) {
    case 0: {
      HeartbeatMsg m;
      const std::uint8_t mode = r.u8();
      const std::uint8_t engine = r.u8();
      const std::uint8_t armed = r.u8();
      if (!valid_mode(mode) || engine > 2 || armed > 1) return DecodeError::BadPayload;
      m.mode = static_cast<Mode>(mode);
      m.engine = static_cast<EngineStatus>(engine);
      m.armed = armed == 1;
      return Message{m};
    }
    case 1: {
      TelemetryMsg m;
      m.geo.lat = r.f64();
      m.geo.lon = r.f64();
      m.psi = r.f64();
      m.v_water = r.f64();
      m.v_ground_east = r.f64();
      m.v_ground_north = r.f64();
      m.fuel = r.f64();
      m.t = r.f64();
      return Message{m};
    }
    case 2: {
      const std::uint8_t mode = r.u8();
      if (!valid_mode(mode)) return DecodeError::BadPayload;
      return Message{SetModeMsg{static_cast<Mode>(mode)}};
    }
    case 3:
      return Message{KillMsg{}};
    case 4: {
      MissionCountMsg m;
      m.count = r.u16();
      m.mission_id = r.u16();
      m.home.lat = r.f64();
      m.home.lon = r.f64();
      return Message{m};
    }
    case 5: {
      MissionItemMsg m;
      m.mission_id = r.u16();
      m.index = r.u16();
      m.waypoint.target.lat = r.f64();
      m.waypoint.target.lon = r.f64();
      m.waypoint.speed = r.f64();
      return Message{m};
    }
    case 6: {
      MissionAckMsg m;
      m.mission_id = r.u16();
      const std::uint8_t status = r.u8();
      if (status > 1) return DecodeError::BadPayload;
      m.status = static_cast<MissionStatus>(status);
      return Message{m};
    }
    case 7: {
      MissionRequestMsg m;
      m.mission_id = r.u16();
      m.index = r.u16();
      return Message{m};
    }
    case 8: {
      VelocitySetpointMsg m;
      m.steering = r.f64();
      m.speed = r.f64();
      return Message{m};
    }
    case 9: {
      if (p.size() < kSensorHeader) return DecodeError::BadLength;
      SensorReportMsg m;
      const std::uint8_t kind = r.u8();
      const std::uint8_t quality = r.u8();
      const std::uint8_t count = r.u8();
      if (p.size() != kSensorHeader + 8u * count) return DecodeError::BadLength;
      if (kind > 2 || quality > 2 || count > kMaxSensorValues) return DecodeError::BadPayload;
      m.kind = static_cast<SensorKind>(kind);
      m.quality = static_cast<SampleQuality>(quality);
      m.t = r.f64();
      m.pos.lat = r.f64();
      m.pos.lon = r.f64();
      m.psi = r.f64();
      m.values.resize(count);
      for (double& v : m.values) v = r.f64();
      return Message{m};
    }
  }
  return DecodeError::UnknownMsg;
}

}  // namespace

std::string_view to_string(DecodeError e) {
  switch (e) {
    case DecodeError::BadMagic: return "bad_magic";
    case DecodeError::Truncated: return "truncated";
    case DecodeError::BadLength: return "bad_length";
    case DecodeError::CrcMismatch: return "crc_mismatch";
    case DecodeError::UnknownMsg: return "unknown_msg";
    case DecodeError::BadPayload: return "bad_payload";
  }
  return "unknown";
}

std::vector<std::uint8_t> encode(const Message& message, std::uint8_t seq, std::uint8_t sys_id) {
  std::vector<std::uint8_t> payload;
  Writer pw(payload);
  write_payload(pw, message);
  if (payload.size() > 255) throw std::length_error("payload exceeds 255 bytes");

  std::vector<std::uint8_t> out;
  out.reserve(payload.size() + kFrameOverhead);
  out.push_back(kFrameMagic);
  out.push_back(static_cast<std::uint8_t>(payload.size()));
  out.push_back(seq);
  out.push_back(sys_id);
  out.push_back(msg_id(message));
  out.insert(out.end(), payload.begin(), payload.end());
  const std::uint16_t crc = crc16_ccitt_false(std::span(out).subspan(1));
  Writer(out).u16(crc);
  return out;
}

DecodeResult decode(std::span<const std::uint8_t> bytes) {
  if (bytes.empty()) return DecodeError::Truncated;
  if (bytes[0] != kFrameMagic) return DecodeError::BadMagic;
  if (bytes.size() < kFrameOverhead) return DecodeError::Truncated;
  const std::size_t total = bytes[1] + kFrameOverhead;
  if (bytes.size() < total) return DecodeError::Truncated;
  if (bytes.size() > total) return DecodeError::BadLength;

  const std::size_t body = total - 2;
  const std::uint16_t want = crc16_ccitt_false(bytes.subspan(1, body - 1));
  const auto got = static_cast<std::uint16_t>(bytes[body] | (bytes[body + 1] << 8));
  if (want != got) return DecodeError::CrcMismatch;

  auto payload = read_payload(bytes[4], bytes.subspan(5, bytes[1]));
  if (auto* err = std::get_if<DecodeError>(&payload)) return *err;
  return Frame{bytes[2], bytes[3], std::get<Message>(std::move(payload))};
}

void StreamDecoder::feed(std::span<const std::uint8_t> bytes) {
  buffer_.insert(buffer_.end(), bytes.begin(), bytes.end());
}

void StreamDecoder::compact() {
  if (head_ > 4096 && head_ * 2 > buffer_.size()) {
    buffer_.erase(buffer_.begin(), buffer_.begin() + static_cast<std::ptrdiff_t>(head_));
    head_ = 0;
  }
}

std::optional<Frame> StreamDecoder::next() {
  while (true) {
    while (head_ < buffer_.size() && buffer_[head_] != kFrameMagic) {
      ++head_;
      ++skipped_;
    }
    const std::size_t avail = buffer_.size() - head_;
    if (avail < kFrameOverhead) break;
    const std::size_t total = buffer_[head_ + 1] + kFrameOverhead;
    if (avail < total) break;
    auto res = decode(std::span(buffer_).subspan(head_, total));
    if (auto* frame = std::get_if<Frame>(&res)) {
      head_ += total;
      ++frames_;
      Frame out = std::move(*frame);
      compact();
      return out;
    }
    ++errors_;
    const DecodeError err = std::get<DecodeError>(res);
    if (err == DecodeError::UnknownMsg || err == DecodeError::BadPayload) {
      // CRC-valid frame we cannot use: drop it whole.
      head_ += total;
      skipped_ += total;
    } else {
      ++head_;
      ++skipped_;
    }
  }
  compact();
  return std::nullopt;
}

}  // namespace jetyak
