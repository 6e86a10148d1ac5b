#include "jetyak/autopilot/modes.hpp"

namespace jetyak {

std::string_view to_string(Mode m) {
  switch (m) {
    case Mode::ManualOnboard: return "MANUAL_ONBOARD";
    case Mode::ManualRc: return "MANUAL_RC";
    case Mode::AutoWpOffboard: return "AUTO_WP_OFFBOARD";
    case Mode::AutoWpOnboard: return "AUTO_WP_ONBOARD";
    case Mode::VelocityControl: return "VELOCITY_CONTROL";
  }
  return "UNKNOWN";
}

std::optional<Mode> mode_from_string(std::string_view s) {
  for (Mode m : kAllModes) {
    if (to_string(m) == s) return m;
  }
  return std::nullopt;
}

bool is_auto(Mode m) { return m == Mode::AutoWpOffboard || m == Mode::AutoWpOnboard; }

std::size_t ModeTable::band_index(double ch5_us) const {
  if (ch5_us < bands.front().lo_us) return 0;
  for (std::size_t k = 0; k < bands.size(); ++k) {
    if (ch5_us >= bands[k].lo_us && ch5_us < bands[k].hi_us) return k;
  }
  return bands.size() - 1;
}

double ModeTable::pulse_for(Mode m) const {
  for (const ModeBand& b : bands) {
    if (b.mode == m) return 0.5 * (b.lo_us + b.hi_us);
  }
  return 0.5 * (bands.front().lo_us + bands.front().hi_us);
}

bool rc_stale(const RcFrame& rc, const ModeTable& table) { return rc.age > table.rc_timeout; }

Mode resolve_mode(const SafetyInputs& safety, const RcFrame& rc, const ModeTable& table,
                  std::optional<Mode> previous) {
  if (safety.hw_manual_switch) return Mode::ManualOnboard;
  if (rc_stale(rc, table)) {
    if (previous && *previous != Mode::ManualOnboard) return *previous;
    return Mode::ManualRc;
  }
  return table.mode_for(rc.ch5_us);
}

EngineCommand evaluate_kill(const SafetyInputs& safety, const RcFrame& rc, const ModeTable& table) {
  if (safety.kill_override) return EngineCommand::Allowed;
  const bool rc_kill = rc.ch6_us < table.kill_below_us;
  if (rc_kill || !safety.autopilot_powered || !safety.kill_line_high) return EngineCommand::Killed;
  return EngineCommand::Allowed;
}

}  // namespace jetyak
