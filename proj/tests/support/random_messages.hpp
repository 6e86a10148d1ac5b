#pragma once

#include <bit>
#include <cmath>

#include "jetyak/common/rng.hpp"
#include "jetyak/link/messages.hpp"

namespace jetyak::testing {

// Any finite double, drawn from raw bit patterns so every exponent occurs.
inline double random_double(Rng& rng) {
  while (true) {
    const double v = std::bit_cast<double>(rng.next_u64());
    if (std::isfinite(v)) return v;
  }
}

inline std::uint16_t random_u16(Rng& rng) { return static_cast<std::uint16_t>(rng.next_u64()); }

template <typename E>
E random_enum(Rng& rng, int count) {
  return static_cast<E>(rng.next_u64() % static_cast<std::uint64_t>(count));
}

inline Message random_message(Rng& rng) {
  switch (rng.next_u64() % 10) {
    case 0: return HeartbeatMsg{random_enum<Mode>(rng, 5), random_enum<EngineStatus>(rng, 3), rng.bernoulli(0.5)};
    case 1:
      return TelemetryMsg{GeoPoint{random_double(rng), random_double(rng)}, random_double(rng), random_double(rng),
                          random_double(rng), random_double(rng), random_double(rng), random_double(rng)};
    case 2: return SetModeMsg{random_enum<Mode>(rng, 5)};
    case 3: return KillMsg{};
    case 4: return MissionCountMsg{random_u16(rng), random_u16(rng), GeoPoint{random_double(rng), random_double(rng)}};
    case 5:
      return MissionItemMsg{random_u16(rng), random_u16(rng),
                            Waypoint{GeoPoint{random_double(rng), random_double(rng)}, random_double(rng)}};
    case 6: return MissionAckMsg{random_u16(rng), random_enum<MissionStatus>(rng, 2)};
    case 7: return MissionRequestMsg{random_u16(rng), random_u16(rng)};
    case 8: return VelocitySetpointMsg{random_double(rng), random_double(rng)};
    default: {
      SensorReportMsg s;
      s.kind = random_enum<SensorKind>(rng, 3);
      s.quality = random_enum<SampleQuality>(rng, 3);
      s.t = random_double(rng);
      s.pos = GeoPoint{random_double(rng), random_double(rng)};
      s.psi = random_double(rng);
      const auto n = rng.next_u64() % (kMaxSensorValues + 1);
      for (std::uint64_t k = 0; k < n; ++k) s.values.push_back(random_double(rng));
      return s;
    }
  }
}

}  // namespace jetyak::testing
