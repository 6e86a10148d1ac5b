#pragma once

#include <deque>
#include <mutex>
#include <optional>
#include <variant>
#include <vector>

#include "jetyak/autopilot/guidance.hpp"
#include "jetyak/autopilot/mission.hpp"
#include "jetyak/autopilot/modes.hpp"
#include "jetyak/autopilot/pid.hpp"
#include "jetyak/vehicle/servo.hpp"
#include "jetyak/vehicle/vehicle.hpp"

namespace jetyak {

struct SetModeCommand {
  Mode mode;
};

struct KillCommand {};

struct VelocitySetpoint {
  double steering = 0.0;  // fraction in [-1, 1]
  double speed = 0.0;     // m/s through the water
};

using AutopilotCommand = std::variant<SetModeCommand, KillCommand, VelocitySetpoint>;

// Factory joystick outputs, used only in ManualOnboard.
struct JoystickInput {
  PwmSignal steering;
  PwmSignal throttle;
};

struct TickInputs {
  RcFrame rc;
  SafetyInputs safety;
  JoystickInput joystick;
};

struct TickOutputs {
  PwmSignal steering;
  PwmSignal throttle;
  EngineCommand engine = EngineCommand::Allowed;
  Mode mode = Mode::ManualRc;
  bool kill_line_high = true;
  std::vector<std::size_t> reached_waypoints;  // accepted during this tick
};

struct AutopilotConfig {
  PidGains gains;
  GuidanceConfig guidance;
  ModeTable modes;
  double setpoint_timeout = 1.0;  // s without a VelocitySetpoint before holding trim
  double tick = 0.05;             // s, 20 Hz
  std::optional<Mode> initial_mode;
};

// Onboard controller for one vehicle. control_tick is called at a fixed rate
// by a single thread; enqueue may be called from any thread.
class Autopilot {
 public:
  Autopilot(AutopilotConfig config, VehicleParams params, GeoPoint origin);

  void enqueue(AutopilotCommand cmd);

  // Replaces the active mission atomically and restarts guidance at its first
  // waypoint from `pos`.
  void load_mission(const Mission& mission, const LocalPoint& pos);

  TickOutputs control_tick(const TickInputs& in, const VehicleState& nav, double dt);

  Mode mode() const { return mode_; }
  const std::optional<Mission>& mission() const { return mission_; }
  const WaypointGuidance& guidance() const { return guidance_; }
  bool mission_done() const { return mission_ && guidance_.done(); }
  bool remote_kill_latched() const { return remote_kill_; }
  void clear_remote_kill() { remote_kill_ = false; }
  const AutopilotConfig& config() const { return config_; }
  void set_gains(const PidGains& gains) { config_.gains = gains; }

 private:
  Mode select_mode(const TickInputs& in);
  void drain_commands(double now);

  AutopilotConfig config_;
  VehicleParams params_;
  GeoPoint origin_;

  std::mutex queue_mutex_;
  std::deque<AutopilotCommand> queue_;

  Mode mode_ = Mode::ManualRc;
  std::optional<Mode> gcs_mode_;
  std::optional<std::size_t> last_band_;
  bool remote_kill_ = false;
  std::optional<VelocitySetpoint> setpoint_;
  double setpoint_time_ = 0.0;
  double now_ = 0.0;

  std::optional<Mission> mission_;
  WaypointGuidance guidance_;
  HeadingPid pid_;
};

}  // namespace jetyak
