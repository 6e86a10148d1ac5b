#include <cstring>
#include <map>

#include "doctest.h"
#include "random_messages.hpp"

#include "jetyak/link/codec.hpp"
#include "jetyak/link/crc16.hpp"
#include "jetyak/link/link_model.hpp"
#include "jetyak/link/mission_transfer.hpp"

using namespace jetyak;

namespace {

// Bit-at-a-time CRC-16/CCITT-FALSE straight from the polynomial definition.
std::uint16_t crc_bitwise(const std::vector<std::uint8_t>& data) {
  std::uint16_t crc = 0xFFFF;
  for (std::uint8_t byte : data) {
    for (int bit = 7; bit >= 0; --bit) {
      const bool in = (byte >> bit) & 1u;
      const bool top = crc & 0x8000u;
      crc = static_cast<std::uint16_t>(crc << 1);
      if (in != top) crc ^= 0x1021;
    }
  }
  return crc;
}

Mission sample_mission(std::size_t n, std::uint16_t id = 7) {
  Mission m;
  m.id = id;
  m.home = GeoPoint{42.36, -71.09};
  for (std::size_t k = 0; k < n; ++k) {
    m.waypoints.push_back(Waypoint{GeoPoint{42.36 + 1e-4 * double(k), -71.09 + 2e-4 * double(k % 3)}, 2.0 + 0.1 * double(k)});
  }
  return m;
}

}  // namespace

TEST_SUITE("link") {

TEST_CASE("CRC matches the published check value and a bitwise oracle") {
  const std::string check = "123456789";
  const std::vector<std::uint8_t> bytes(check.begin(), check.end());
  CHECK(crc16_ccitt_false(bytes) == 0x29B1);
  CHECK(crc_bitwise(bytes) == 0x29B1);
  CHECK(crc16_ccitt_false(std::span<const std::uint8_t>{}) == 0xFFFF);
  Rng rng(4);
  for (int k = 0; k < 2000; ++k) {
    std::vector<std::uint8_t> data(rng.next_u64() % 300);
    for (auto& b : data) b = static_cast<std::uint8_t>(rng.next_u64());
    CHECK(crc16_ccitt_false(data) == crc_bitwise(data));
    // Incremental use continues from a running value.
    const std::size_t cut = data.empty() ? 0 : rng.next_u64() % data.size();
    const std::uint16_t head = crc16_ccitt_false(std::span(data).first(cut));
    CHECK(crc16_ccitt_false(std::span(data).subspan(cut), head) == crc_bitwise(data));
  }
}

TEST_CASE("frame layout is magic, len, seq, sys, msg, payload, little-endian CRC") {
  const auto bytes = encode(SetModeMsg{Mode::VelocityControl}, 0x42, 0x07);
  REQUIRE(bytes.size() == 8);
  CHECK(bytes[0] == 0xA5);
  CHECK(bytes[1] == 1);
  CHECK(bytes[2] == 0x42);
  CHECK(bytes[3] == 0x07);
  CHECK(bytes[4] == 2);
  CHECK(bytes[5] == 4);
  const std::vector<std::uint8_t> covered(bytes.begin() + 1, bytes.begin() + 6);
  const std::uint16_t crc = crc_bitwise(covered);
  CHECK(bytes[6] == (crc & 0xFF));
  CHECK(bytes[7] == (crc >> 8));

  const auto vel = encode(VelocitySetpointMsg{0.25, 3.0}, 0, 1);
  double steering = 0.0;
  std::memcpy(&steering, vel.data() + 5, 8);  // little-endian host
  CHECK(steering == 0.25);
  CHECK(encode(KillMsg{}, 0, 1).size() == kFrameOverhead);
}

TEST_CASE("random messages round trip bit-exact") {
  Rng rng(5);
  for (int k = 0; k < 20000; ++k) {
    const Message m = testing::random_message(rng);
    const auto seq = static_cast<std::uint8_t>(k);
    const auto sys = static_cast<std::uint8_t>(rng.next_u64());
    const auto bytes = encode(m, seq, sys);
    const DecodeResult r = decode(bytes);
    REQUIRE(std::holds_alternative<Frame>(r));
    const Frame& f = std::get<Frame>(r);
    CHECK(f.seq == seq);
    CHECK(f.sys_id == sys);
    CHECK(f.message == m);
    CHECK(encode(f) == bytes);
  }
}

TEST_CASE("every single-bit flip is detected") {
  TelemetryMsg t;
  t.geo = GeoPoint{42.36, -71.09};
  t.psi = 1.0;
  t.fuel = 8.5;
  const auto good = encode(t, 9, 3);
  for (std::size_t byte = 0; byte < good.size(); ++byte) {
    for (int bit = 0; bit < 8; ++bit) {
      auto bad = good;
      bad[byte] ^= static_cast<std::uint8_t>(1u << bit);
      const DecodeResult r = decode(bad);
      REQUIRE(std::holds_alternative<DecodeError>(r));
    }
  }
}

TEST_CASE("decode error classes") {
  const auto good = encode(HeartbeatMsg{}, 0, 1);
  auto bad_magic = good;
  bad_magic[0] = 0x5A;
  CHECK(std::get<DecodeError>(decode(bad_magic)) == DecodeError::BadMagic);
  CHECK(std::get<DecodeError>(decode(std::span(good).first(5))) == DecodeError::Truncated);
  auto extra = good;
  extra.push_back(0);
  CHECK(std::get<DecodeError>(decode(extra)) == DecodeError::BadLength);

  // CRC-valid frames with an unknown id or out-of-range enum.
  auto rebuild = [](std::vector<std::uint8_t> f) {
    const std::uint16_t crc = crc_bitwise(std::vector<std::uint8_t>(f.begin() + 1, f.end() - 2));
    f[f.size() - 2] = static_cast<std::uint8_t>(crc & 0xFF);
    f[f.size() - 1] = static_cast<std::uint8_t>(crc >> 8);
    return f;
  };
  auto unknown = good;
  unknown[4] = 42;
  CHECK(std::get<DecodeError>(decode(rebuild(unknown))) == DecodeError::UnknownMsg);
  auto bad_mode = encode(SetModeMsg{}, 0, 1);
  bad_mode[5] = 9;
  CHECK(std::get<DecodeError>(decode(rebuild(bad_mode))) == DecodeError::BadPayload);
  auto wrong_len = encode(SetModeMsg{}, 0, 1);
  wrong_len.insert(wrong_len.begin() + 5, 0);
  wrong_len[1] = 2;
  CHECK(std::get<DecodeError>(decode(rebuild(wrong_len))) == DecodeError::BadLength);

  SensorReportMsg big;
  big.values.assign(kMaxSensorValues + 1, 1.0);
  CHECK_THROWS_AS(encode(big, 0, 1), std::length_error);
}

TEST_CASE("stream decoder resynchronizes through garbage and split feeds") {
  Rng rng(6);
  std::vector<std::uint8_t> stream;
  std::vector<Message> sent;
  for (int k = 0; k < 500; ++k) {
    for (std::uint64_t g = rng.next_u64() % 5; g > 0; --g) stream.push_back(static_cast<std::uint8_t>(rng.next_u64()));
    sent.push_back(testing::random_message(rng));
    const auto f = encode(sent.back(), static_cast<std::uint8_t>(k), 1);
    stream.insert(stream.end(), f.begin(), f.end());
  }
  StreamDecoder dec;
  std::vector<Message> got;
  std::size_t pos = 0;
  while (pos < stream.size()) {
    const std::size_t n = std::min<std::size_t>(1 + rng.next_u64() % 40, stream.size() - pos);
    dec.feed(std::span(stream).subspan(pos, n));
    pos += n;
    while (auto f = dec.next()) got.push_back(f->message);
  }
  // Random garbage can fake a magic byte but almost never a valid CRC; every
  // real frame must come through in order.
  std::size_t match = 0;
  for (const Message& m : got) {
    if (match < sent.size() && m == sent[match]) ++match;
  }
  CHECK(match == sent.size());
  CHECK(got.size() <= sent.size() + 2);
}

TEST_CASE("decoder survives arbitrary bytes") {
  Rng rng(7);
  StreamDecoder dec;
  std::size_t frames = 0;
  for (int chunk = 0; chunk < 200; ++chunk) {
    std::vector<std::uint8_t> junk(1000);
    for (auto& b : junk) b = static_cast<std::uint8_t>(rng.next_u64() % 4 == 0 ? 0xA5 : rng.next_u64());
    dec.feed(junk);
    while (dec.next()) ++frames;
    const DecodeResult r = decode(junk);
    CHECK(std::holds_alternative<DecodeError>(r));
  }
  CHECK(dec.buffered() < 300);
  CHECK(frames < 5);
}

TEST_CASE("link range cliff and loss rate") {
  LinkModel link;
  link.latency = 0.2;
  Rng rng(8);
  for (double d : {0.0, 1000.0, 2790.0, 2800.0}) {
    const TransmitOutcome o = transmit(link, 5.0, d, rng);
    REQUIRE(std::holds_alternative<Delivered>(o));
    CHECK(std::get<Delivered>(o).at == doctest::Approx(5.2));
  }
  for (double d : {2800.001, 2810.0, 10000.0}) CHECK(std::holds_alternative<Dropped>(transmit(link, 0.0, d, rng)));

  link.base_loss = 0.3;
  int dropped = 0;
  const int n = 20000;
  for (int k = 0; k < n; ++k) dropped += std::holds_alternative<Dropped>(transmit(link, 0.0, 10.0, rng));
  // Binomial: 4 standard deviations is about 0.013.
  CHECK(double(dropped) / n == doctest::Approx(0.3).epsilon(0.05));

  link.base_loss = 1.5;
  CHECK_THROWS_AS(link.validate(), std::invalid_argument);
}

TEST_CASE("link channel preserves order and honours latency and severing") {
  LinkModel m;
  m.latency = 0.1;
  LinkChannel ch(m, Rng(9));
  CHECK(ch.send({1}, 0.0, 10.0));
  CHECK(ch.send({2}, 0.05, 10.0));
  CHECK(ch.receive(0.09).empty());
  auto first = ch.receive(0.1);
  REQUIRE(first.size() == 1);
  CHECK(first[0] == std::vector<std::uint8_t>{1});
  CHECK(ch.receive(0.2).size() == 1);
  ch.set_severed(true);
  CHECK_FALSE(ch.send({3}, 0.3, 10.0));
  CHECK(ch.receive(1.0).empty());
  CHECK(ch.sent() == 3);
  CHECK(ch.dropped() == 1);
}

TEST_CASE("identical seeds give identical loss patterns") {
  LinkModel m;
  m.base_loss = 0.5;
  LinkChannel a(m, Rng(10));
  LinkChannel b(m, Rng(10));
  for (int k = 0; k < 200; ++k) CHECK(a.send({0}, k * 0.1, 100.0) == b.send({0}, k * 0.1, 100.0));
}

TEST_CASE("mission upload converges under 20 percent loss") {
  LinkModel link;
  link.base_loss = 0.2;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    Rng rng(seed);
    const Mission mission = sample_mission(40, static_cast<std::uint16_t>(seed));
    MissionReceiver rx;
    std::optional<Mission> onboard;
    const UploadReport r = simulate_upload(mission, link, rng, rx, onboard);
    CHECK(r.ack.status == MissionStatus::Accepted);
    REQUIRE(onboard.has_value());
    CHECK(*onboard == mission);
    CHECK(r.frames_dropped > 0);
  }
}

TEST_CASE("a severed upload fails and leaves the previous mission in place") {
  LinkModel link;
  Rng rng(11);
  MissionReceiver rx;
  std::optional<Mission> onboard;
  const Mission first = sample_mission(5, 1);
  REQUIRE(simulate_upload(first, link, rng, rx, onboard).ack.status == MissionStatus::Accepted);
  REQUIRE(onboard == first);

  // The initial burst goes out at t = 0 with some items lost; the link is
  // cut before any gap can be filled.
  LinkModel lossy = link;
  lossy.base_loss = 0.3;
  const Mission second = sample_mission(60, 2);
  const UploadReport r = simulate_upload(second, lossy, rng, rx, onboard, 100.0, 0.01);
  CHECK(r.ack.status == MissionStatus::Failed);
  CHECK(onboard == first);
  CHECK_FALSE(rx.take_completed().has_value());
}

TEST_CASE("receiver ignores items from a different mission and requests gaps") {
  MissionReceiver rx;
  const Mission m = sample_mission(3, 5);
  rx.on_message(MissionCountMsg{3, 5, m.home}, 0.0);
  rx.on_message(MissionItemMsg{6, 0, m.waypoints[0]}, 0.01);
  rx.on_message(MissionItemMsg{5, 0, m.waypoints[0]}, 0.02);
  rx.on_message(MissionItemMsg{5, 2, m.waypoints[2]}, 0.03);
  CHECK(rx.in_progress());
  const auto req = rx.poll(2.0);
  bool asked_for_1 = false;
  for (const Message& msg : req) {
    if (const auto* r = std::get_if<MissionRequestMsg>(&msg)) asked_for_1 |= r->mission_id == 5 && r->index == 1;
  }
  CHECK(asked_for_1);
  const auto out = rx.on_message(MissionItemMsg{5, 1, m.waypoints[1]}, 2.1);
  bool acked = false;
  for (const Message& msg : out) {
    if (const auto* a = std::get_if<MissionAckMsg>(&msg)) acked = a->mission_id == 5 && a->status == MissionStatus::Accepted;
  }
  CHECK(acked);
  const auto done = rx.take_completed();
  REQUIRE(done.has_value());
  CHECK(*done == m);
}

}  // TEST_SUITE
