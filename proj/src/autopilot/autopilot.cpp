#include "jetyak/autopilot/autopilot.hpp"

#include <utility>

namespace jetyak {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

}  // namespace

Autopilot::Autopilot(AutopilotConfig config, VehicleParams params, GeoPoint origin)
    : config_(std::move(config)), params_(std::move(params)), origin_(origin) {
  config_.gains.validate();
  params_.validate();
  if (config_.initial_mode && *config_.initial_mode != Mode::ManualOnboard) {
    gcs_mode_ = config_.initial_mode;
    mode_ = *config_.initial_mode;
  }
}

void Autopilot::enqueue(AutopilotCommand cmd) {
  std::lock_guard<std::mutex> lock(queue_mutex_);
  queue_.push_back(std::move(cmd));
}

void Autopilot::load_mission(const Mission& mission, const LocalPoint& pos) {
  WaypointGuidance next(mission, origin_, pos);
  mission_ = mission;
  guidance_ = std::move(next);
  pid_.reset();
}

void Autopilot::drain_commands(double now) {
  std::deque<AutopilotCommand> pending;
  {
    std::lock_guard<std::mutex> lock(queue_mutex_);
    pending.swap(queue_);
  }
  for (const AutopilotCommand& cmd : pending) {
    std::visit(Overloaded{
                   [this](const SetModeCommand& c) {
                     // The factory joystick is only reachable through the hardware switch.
                     if (c.mode != Mode::ManualOnboard) gcs_mode_ = c.mode;
                   },
                   [this](const KillCommand&) { remote_kill_ = true; },
                   [this, now](const VelocitySetpoint& c) {
                     setpoint_ = c;
                     setpoint_time_ = now;
                   },
               },
               cmd);
  }
}

Mode Autopilot::select_mode(const TickInputs& in) {
  if (!rc_stale(in.rc, config_.modes)) {
    const std::size_t band = config_.modes.band_index(in.rc.ch5_us);
    // Moving the mode switch takes authority back from the GCS.
    if (last_band_ && *last_band_ != band) gcs_mode_.reset();
    last_band_ = band;
  }
  if (in.safety.hw_manual_switch) return Mode::ManualOnboard;
  if (gcs_mode_) return *gcs_mode_;
  return resolve_mode(in.safety, in.rc, config_.modes, mode_);
}

TickOutputs Autopilot::control_tick(const TickInputs& in, const VehicleState& nav, double dt) {
  now_ = nav.t;
  drain_commands(now_);

  const Mode previous = mode_;
  mode_ = select_mode(in);
  if (mode_ != previous) pid_.reset();

  TickOutputs out;
  out.mode = mode_;
  const PwmSignal steer_trim{params_.steering_servo.trim_us()};
  const PwmSignal throttle_trim{params_.throttle_servo.trim_us()};
  out.steering = steer_trim;
  out.throttle = throttle_trim;

  const bool stale = rc_stale(in.rc, config_.modes);
  const bool rc_loss_kill = mode_ == Mode::ManualRc && stale;
  out.kill_line_high = !(remote_kill_ || rc_loss_kill);

  SafetyInputs effective = in.safety;
  effective.kill_line_high = in.safety.kill_line_high && out.kill_line_high;
  out.engine = evaluate_kill(effective, in.rc, config_.modes);

  if (mode_ == Mode::ManualOnboard) {
    out.steering = in.joystick.steering;
    out.throttle = in.joystick.throttle;
    return out;
  }
  if (!in.safety.autopilot_powered) return out;

  switch (mode_) {
    case Mode::ManualOnboard:
      break;
    case Mode::ManualRc:
      if (!stale) {
        out.steering = PwmSignal{in.rc.ch1_us};
        out.throttle = PwmSignal{in.rc.ch3_us};
      }
      break;
    case Mode::AutoWpOffboard:
    case Mode::AutoWpOnboard:
      if (mission_ && !guidance_.done()) {
        const GuidanceOutput g = guidance_.update(nav, config_.gains, config_.guidance, params_.v_max);
        out.reached_waypoints = g.accepted;
        if (!g.done) {
          const double steer = pid_.update(config_.gains, g.psi_des, nav.psi, dt);
          out.steering = normalized_to_pwm(steer, params_.steering_servo);
          out.throttle = normalized_to_pwm(g.throttle, params_.throttle_servo);
        }
      }
      break;
    case Mode::VelocityControl:
      if (setpoint_ && now_ - setpoint_time_ <= config_.setpoint_timeout) {
        out.steering = normalized_to_pwm(setpoint_->steering, params_.steering_servo);
        const double u = speed_loop(setpoint_->speed, nav.v_water, params_.v_max,
                                    config_.guidance.speed_gain);
        out.throttle = normalized_to_pwm(u, params_.throttle_servo);
      }
      break;
  }
  return out;
}

}  // namespace jetyak
