#include "jetyak/vehicle/vehicle.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace jetyak {

void VehicleParams::validate() const {
  if (!(v_max > 0.0)) throw std::invalid_argument("v_max must be > 0");
  if (!(r_min > 0.0)) throw std::invalid_argument("r_min must be > 0");
  if (!(delta_max > 0.0)) throw std::invalid_argument("delta_max must be > 0");
  if (!(tau_v > 0.0)) throw std::invalid_argument("tau_v must be > 0");
  if (!(fuel_capacity > 0.0)) throw std::invalid_argument("fuel_capacity must be > 0");
  if (!(rate_idle > 0.0 && rate_full > rate_idle)) {
    throw std::invalid_argument("fuel rates require rate_full > rate_idle > 0");
  }
  if (!(wind_coeff >= 0.0)) throw std::invalid_argument("wind_coeff must be >= 0");
}

std::string_view to_string(EngineStatus e) {
  switch (e) {
    case EngineStatus::Running: return "running";
    case EngineStatus::Killed: return "killed";
    case EngineStatus::FuelExhausted: return "fuel_exhausted";
  }
  return "unknown";
}

VehicleState initial_state(const VehicleParams& params, const LocalPoint& pos, Heading psi) {
  VehicleState s;
  s.pos = pos;
  s.psi = psi;
  s.fuel = params.fuel_capacity;
  return s;
}

double fuel_rate(const VehicleParams& params, double u) {
  return params.rate_idle + (params.rate_full - params.rate_idle) * std::clamp(u, 0.0, 1.0);
}

double fuel_endurance(const VehicleParams& params, double u) {
  if (!(u >= 0.0 && u <= 1.0)) throw std::invalid_argument("fuel_endurance: u outside [0, 1]");
  return params.fuel_capacity / fuel_rate(params, u);
}

VehicleState step(const VehicleState& state, const VehicleParams& params, PwmSignal steering,
                  PwmSignal throttle, const EnvironmentField& env, double dt) {
  if (!(dt > 0.0 && dt <= 0.1)) throw std::invalid_argument("step: dt must be in (0, 0.1]");

  VehicleState next = state;
  const double throttle_frac = pwm_to_normalized(throttle, params.throttle_servo);
  const double steer_frac = pwm_to_normalized(steering, params.steering_servo);
  next.clutch_engaged = throttle_frac >= 0.0;
  const bool running = state.engine == EngineStatus::Running;
  const double u = (running && next.clutch_engaged) ? throttle_frac : 0.0;

  const double target = u * params.v_max;
  next.v_water = std::clamp(state.v_water + (dt / params.tau_v) * (target - state.v_water), 0.0,
                            params.v_max);

  // Nozzle deflection scales curvature; full deflection gives 1 / r_min.
  const double delta = params.delta_max * steer_frac;
  const double yaw_rate = (state.v_water / params.r_min) * (delta / params.delta_max);

  const double psi = state.psi.radians();
  const Vector2 through_water(state.v_water, 0.0);
  const Vector2 v_ground = boat_to_world(through_water, psi, env.current_at(state.pos)) +
                           params.wind_coeff * env.wind_at(state.pos);
  next.v_ground = v_ground;
  next.pos = state.pos + v_ground * dt;
  next.psi = Heading(psi + yaw_rate * dt);
  next.t = state.t + dt;

  if (running) {
    const double burn = dt * fuel_rate(params, u) / 3600.0;
    if (burn >= state.fuel) {
      next.fuel = 0.0;
      next.engine = EngineStatus::FuelExhausted;
    } else {
      next.fuel = state.fuel - burn;
    }
  }
  return next;
}

VehicleState apply_kill(VehicleState state) {
  if (state.engine == EngineStatus::Running) state.engine = EngineStatus::Killed;
  return state;
}

VehicleState start_engine(VehicleState state) {
  if (state.engine == EngineStatus::Killed && state.fuel > 0.0) state.engine = EngineStatus::Running;
  return state;
}

}  // namespace jetyak
