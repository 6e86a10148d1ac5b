#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string_view>

namespace jetyak {

enum class Mode : std::uint8_t {
  ManualOnboard = 0,   // factory joystick through the hardware manual/auto switch
  ManualRc = 1,        // teleoperation over the RC link
  AutoWpOffboard = 2,  // waypoints supplied and supervised from the GCS
  AutoWpOnboard = 3,   // programmed mission executed locally
  VelocityControl = 4, // external steering/speed setpoints
};

inline constexpr std::array<Mode, 5> kAllModes = {Mode::ManualOnboard, Mode::ManualRc,
                                                  Mode::AutoWpOffboard, Mode::AutoWpOnboard,
                                                  Mode::VelocityControl};

std::string_view to_string(Mode m);
std::optional<Mode> mode_from_string(std::string_view s);
bool is_auto(Mode m);

// Latest RC receiver channels. Pulse widths in microseconds; `age` is the
// time since the last received RC packet.
struct RcFrame {
  double ch1_us = 1500.0;  // steering
  double ch3_us = 1500.0;  // throttle
  double ch5_us = 1165.0;  // mode (3-position x 2-position switch mix)
  double ch6_us = 1900.0;  // teleoperated kill, low = kill
  double age = 0.0;
};

struct SafetyInputs {
  bool hw_manual_switch = false;   // true selects the factory joystick
  bool kill_override = false;      // physical switch disabling the kill relay
  bool autopilot_powered = true;
  bool kill_line_high = true;      // relay coil driven; low shorts the magneto

  friend bool operator==(const SafetyInputs&, const SafetyInputs&) = default;
};

struct ModeBand {
  double lo_us;
  double hi_us;  // exclusive
  Mode mode;
};

// Channel-5 band table. Two switches give six positions for five modes, so
// two bands are spares mapped onto safe modes.
struct ModeTable {
  std::array<ModeBand, 6> bands = {{
      {900.0, 1230.0, Mode::ManualRc},
      {1230.0, 1360.0, Mode::AutoWpOffboard},
      {1360.0, 1490.0, Mode::AutoWpOnboard},
      {1490.0, 1620.0, Mode::VelocityControl},
      {1620.0, 1750.0, Mode::ManualRc},
      {1750.0, 2100.0, Mode::AutoWpOnboard},
  }};
  double rc_timeout = 2.0;       // s
  double kill_below_us = 1300.0; // ch6 below this commands a kill

  // Band index for a ch5 pulse; pulses outside the table clamp to the end bands.
  std::size_t band_index(double ch5_us) const;
  Mode mode_for(double ch5_us) const { return bands[band_index(ch5_us)].mode; }
  // Midpoint of the first band selecting `m`.
  double pulse_for(Mode m) const;
};

bool rc_stale(const RcFrame& rc, const ModeTable& table);

// Mode selection. The hardware manual switch dominates; otherwise ch5 picks
// a band. With a stale RC link the previous mode is held (ManualRc if none).
Mode resolve_mode(const SafetyInputs& safety, const RcFrame& rc, const ModeTable& table = {},
                  std::optional<Mode> previous = std::nullopt);

enum class EngineCommand : std::uint8_t { Allowed = 0, Killed = 1 };

// Kill relay logic: killed iff the override is off and any of ch6 low,
// autopilot unpowered or kill line low holds.
EngineCommand evaluate_kill(const SafetyInputs& safety, const RcFrame& rc,
                            const ModeTable& table = {});

}  // namespace jetyak
