#include "jetyak/sim/event_log.hpp"

#include <bit>
#include <cstring>
#include <istream>
#include <iterator>
#include <ostream>
#include <stdexcept>

namespace jetyak {

namespace {

class Writer {
 public:
  void u8(std::uint8_t v) { out.push_back(v); }
  void u16(std::uint16_t v) { raw(v); }
  void u32(std::uint32_t v) { raw(v); }
  void u64(std::uint64_t v) { raw(v); }
  void f64(double v) { raw(std::bit_cast<std::uint64_t>(v)); }
  void bytes(const std::vector<std::uint8_t>& b) {
    u32(static_cast<std::uint32_t>(b.size()));
    out.insert(out.end(), b.begin(), b.end());
  }
  void str(const std::string& s) {
    u32(static_cast<std::uint32_t>(s.size()));
    out.insert(out.end(), s.begin(), s.end());
  }

  std::vector<std::uint8_t> out;

 private:
  template <class T>
  void raw(T v) {
    for (std::size_t k = 0; k < sizeof(T); ++k) out.push_back(static_cast<std::uint8_t>(v >> (8 * k)));
  }
};

class Reader {
 public:
  explicit Reader(const std::vector<std::uint8_t>& b) : buf(b) {}

  std::uint8_t u8() { return static_cast<std::uint8_t>(raw<1>()); }
  std::uint16_t u16() { return static_cast<std::uint16_t>(raw<2>()); }
  std::uint32_t u32() { return static_cast<std::uint32_t>(raw<4>()); }
  std::uint64_t u64() { return raw<8>(); }
  double f64() { return std::bit_cast<double>(raw<8>()); }
  std::vector<std::uint8_t> bytes() {
    const std::uint32_t n = u32();
    need(n);
    std::vector<std::uint8_t> v(buf.begin() + static_cast<std::ptrdiff_t>(pos),
                                buf.begin() + static_cast<std::ptrdiff_t>(pos + n));
    pos += n;
    return v;
  }
  std::string str() {
    const std::vector<std::uint8_t> b = bytes();
    return std::string(b.begin(), b.end());
  }
  bool at_end() const { return pos == buf.size(); }

 private:
  void need(std::size_t n) const {
    if (buf.size() - pos < n) throw std::runtime_error("record payload too short");
  }
  template <std::size_t N>
  std::uint64_t raw() {
    need(N);
    std::uint64_t v = 0;
    for (std::size_t k = 0; k < N; ++k) v |= static_cast<std::uint64_t>(buf[pos + k]) << (8 * k);
    pos += N;
    return v;
  }

  const std::vector<std::uint8_t>& buf;
  std::size_t pos = 0;
};

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void write_payload(Writer& w, const LogRecord& record) {
  std::visit(Overloaded{
                 [&](const SessionStartRec& r) {
                   w.u64(r.seed);
                   w.f64(r.dt);
                   w.f64(r.origin_lat);
                   w.f64(r.origin_lon);
                   w.str(r.name);
                 },
                 [&](const VehicleStateRec& r) {
                   w.f64(r.t);
                   w.u8(r.sys_id);
                   for (double v : {r.x, r.y, r.psi, r.v_water, r.vg_east, r.vg_north, r.fuel}) w.f64(v);
                   w.u8(r.engine);
                   w.u8(r.mode);
                   w.u32(r.active_index);
                 },
                 [&](const FrameSentRec& r) {
                   w.f64(r.t);
                   w.u8(r.sys_id);
                   w.u8(static_cast<std::uint8_t>(r.direction));
                   w.u8(r.delivered ? 1 : 0);
                   w.bytes(r.bytes);
                 },
                 [&](const FrameReceivedGcsRec& r) {
                   w.f64(r.t);
                   w.u8(r.sys_id);
                   w.bytes(r.bytes);
                 },
                 [&](const WaypointReachedRec& r) {
                   w.f64(r.t);
                   w.u8(r.sys_id);
                   w.u32(r.index);
                 },
                 [&](const MissionActivatedRec& r) {
                   w.f64(r.t);
                   w.u8(r.sys_id);
                   w.u16(r.mission_id);
                   w.f64(r.wp_radius);
                   w.f64(r.start_x);
                   w.f64(r.start_y);
                   w.u32(static_cast<std::uint32_t>(r.xy.size()));
                   for (double v : r.xy) w.f64(v);
                 },
                 [&](const CommandRec& r) {
                   w.f64(r.t);
                   w.u8(r.sys_id);
                   w.str(r.text);
                 },
                 [&](const SessionEndRec& r) { w.f64(r.t); },
             },
             record);
}

LogRecord read_payload(std::uint8_t type, Reader& r) {
  switch (type) {
    case 0: {
      SessionStartRec s;
      s.seed = r.u64();
      s.dt = r.f64();
      s.origin_lat = r.f64();
      s.origin_lon = r.f64();
      s.name = r.str();
      return s;
    }
    case 1: {
      VehicleStateRec s;
      s.t = r.f64();
      s.sys_id = r.u8();
      s.x = r.f64();
      s.y = r.f64();
      s.psi = r.f64();
      s.v_water = r.f64();
      s.vg_east = r.f64();
      s.vg_north = r.f64();
      s.fuel = r.f64();
      s.engine = r.u8();
      s.mode = r.u8();
      s.active_index = r.u32();
      return s;
    }
    case 2: {
      FrameSentRec s;
      s.t = r.f64();
      s.sys_id = r.u8();
      const std::uint8_t dir = r.u8();
      if (dir > 1) throw std::runtime_error("bad link direction");
      s.direction = static_cast<LinkDirection>(dir);
      s.delivered = r.u8() != 0;
      s.bytes = r.bytes();
      return s;
    }
    case 3: {
      FrameReceivedGcsRec s;
      s.t = r.f64();
      s.sys_id = r.u8();
      s.bytes = r.bytes();
      return s;
    }
    case 4: {
      WaypointReachedRec s;
      s.t = r.f64();
      s.sys_id = r.u8();
      s.index = r.u32();
      return s;
    }
    case 5: {
      MissionActivatedRec s;
      s.t = r.f64();
      s.sys_id = r.u8();
      s.mission_id = r.u16();
      s.wp_radius = r.f64();
      s.start_x = r.f64();
      s.start_y = r.f64();
      const std::uint32_t n = r.u32();
      if (n > (1u << 24)) throw std::runtime_error("implausible waypoint count");
      s.xy.reserve(n);
      for (std::uint32_t k = 0; k < n; ++k) s.xy.push_back(r.f64());
      return s;
    }
    case 6: {
      CommandRec s;
      s.t = r.f64();
      s.sys_id = r.u8();
      s.text = r.str();
      return s;
    }
    case 7: {
      SessionEndRec s;
      s.t = r.f64();
      return s;
    }
    default:
      throw std::runtime_error("unknown record type " + std::to_string(type));
  }
}

}  // namespace

std::vector<std::uint8_t> serialize_record(const LogRecord& record) {
  Writer w;
  w.u32(0);  // length placeholder
  w.u8(static_cast<std::uint8_t>(record.index()));
  write_payload(w, record);
  const auto len = static_cast<std::uint32_t>(w.out.size() - 4);
  for (std::size_t k = 0; k < 4; ++k) w.out[k] = static_cast<std::uint8_t>(len >> (8 * k));
  return w.out;
}

EventLogWriter::EventLogWriter(std::ostream& out) : out_(out) {
  out_.write(kEventLogMagic, sizeof kEventLogMagic);
}

void EventLogWriter::write(const LogRecord& record) {
  const std::vector<std::uint8_t> bytes = serialize_record(record);
  out_.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  ++records_;
}

EventLogContents read_event_log(std::istream& in) {
  char magic[sizeof kEventLogMagic];
  in.read(magic, sizeof magic);
  if (in.gcount() != static_cast<std::streamsize>(sizeof magic) ||
      std::memcmp(magic, kEventLogMagic, sizeof magic) != 0) {
    throw std::runtime_error("not a session event log (bad magic)");
  }
  EventLogContents out;
  std::vector<std::uint8_t> body;
  while (true) {
    unsigned char len_bytes[4];
    in.read(reinterpret_cast<char*>(len_bytes), 4);
    const std::streamsize got = in.gcount();
    if (got == 0) break;
    if (got < 4) {
      out.truncated = true;
      out.warning = "log truncated inside a record header after " + std::to_string(out.records.size()) +
                    " records";
      break;
    }
    const std::uint32_t len = static_cast<std::uint32_t>(len_bytes[0]) |
                              static_cast<std::uint32_t>(len_bytes[1]) << 8 |
                              static_cast<std::uint32_t>(len_bytes[2]) << 16 |
                              static_cast<std::uint32_t>(len_bytes[3]) << 24;
    if (len == 0 || len > (1u << 28)) {
      out.truncated = true;
      out.warning = "corrupt record length after " + std::to_string(out.records.size()) + " records";
      break;
    }
    body.resize(len);
    in.read(reinterpret_cast<char*>(body.data()), len);
    if (in.gcount() != static_cast<std::streamsize>(len)) {
      out.truncated = true;
      out.warning = "log truncated inside record " + std::to_string(out.records.size() + 1);
      break;
    }
    try {
      std::vector<std::uint8_t> payload(body.begin() + 1, body.end());
      Reader r(payload);
      LogRecord rec = read_payload(body[0], r);
      if (!r.at_end()) throw std::runtime_error("trailing bytes in record");
      out.records.push_back(std::move(rec));
    } catch (const std::exception& e) {
      out.truncated = true;
      out.warning = "corrupt record " + std::to_string(out.records.size() + 1) + ": " + e.what();
      break;
    }
  }
  return out;
}

}  // namespace jetyak
