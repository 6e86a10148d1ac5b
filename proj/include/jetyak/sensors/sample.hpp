#pragma once

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "jetyak/world/frames.hpp"
#include "jetyak/world/geo.hpp"

namespace jetyak {

enum class SensorKind : std::uint8_t { Depth = 0, Wind = 1, Current = 2 };
enum class SampleQuality : std::uint8_t { Ok = 0, Suspect = 1, Undefined = 2 };

std::string_view to_string(SensorKind k);
std::string_view to_string(SampleQuality q);
std::optional<SensorKind> sensor_kind_from_string(std::string_view s);
std::optional<SampleQuality> quality_from_string(std::string_view s);

// One reading. Depth carries one value (meters, positive down); Wind and
// Current carry the boat-frame (forward, starboard) velocity in m/s.
struct SensorSample {
  double t = 0.0;
  std::uint8_t sys_id = 0;
  GeoPoint pos;
  double psi = 0.0;
  SensorKind kind = SensorKind::Depth;
  std::vector<double> values;
  SampleQuality quality = SampleQuality::Ok;
  // Ground velocity of the vehicle when the sample was taken; required to
  // move boat-relative readings into the world frame.
  std::optional<Vector2> v_ground;

  friend bool operator==(const SensorSample&, const SensorSample&) = default;
};

}  // namespace jetyak
