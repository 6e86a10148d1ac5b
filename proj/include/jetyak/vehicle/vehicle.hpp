#pragma once

#include <cstdint>
#include <string_view>

#include "jetyak/vehicle/servo.hpp"
#include "jetyak/world/angles.hpp"
#include "jetyak/world/environment.hpp"
#include "jetyak/world/frames.hpp"
#include "jetyak/world/geo.hpp"

namespace jetyak {

// Jetyak performance envelope. Defaults reproduce the stock platform:
// 21.7 km/h top speed, 9.8 L tank lasting 18 h at idle and 4 h flat out,
// 5 m minimum turning radius.
struct VehicleParams {
  double v_max = 21.7 / 3.6;  // m/s
  double r_min = 5.0;         // m, turning radius at full nozzle deflection
  double delta_max = 0.5;     // rad, nozzle deflection limit
  double tau_v = 2.0;         // s, first-order speed lag
  double fuel_capacity = 9.8;       // L
  double rate_idle = 9.8 / 18.0;    // L/h
  double rate_full = 9.8 / 4.0;     // L/h
  double payload_max = 163.0;       // kg, informational
  double wind_coeff = 0.02;         // ground drift per unit wind speed
  ServoCalibration steering_servo{1100.0, 1500.0, 1900.0};
  ServoCalibration throttle_servo{1100.0, 1500.0, 1900.0};

  // Throws std::invalid_argument when an invariant is violated.
  void validate() const;
};

enum class EngineStatus : std::uint8_t { Running = 0, Killed = 1, FuelExhausted = 2 };

std::string_view to_string(EngineStatus e);

struct VehicleState {
  LocalPoint pos = LocalPoint::Zero();
  Heading psi;
  double v_water = 0.0;  // water-relative forward speed, m/s
  double fuel = 9.8;     // L
  EngineStatus engine = EngineStatus::Running;
  bool clutch_engaged = true;
  double t = 0.0;
  Vector2 v_ground = Vector2::Zero();  // world-frame ground velocity from the last step
};

VehicleState initial_state(const VehicleParams& params, const LocalPoint& pos, Heading psi);

// Advances one explicit-Euler step. Requires 0 < dt <= 0.1 s
// (std::invalid_argument otherwise). Pure: identical inputs give
// bit-identical outputs.
VehicleState step(const VehicleState& state, const VehicleParams& params, PwmSignal steering,
                  PwmSignal throttle, const EnvironmentField& env, double dt);

// Magneto shorted: thrust stops immediately, the hull then coasts down.
VehicleState apply_kill(VehicleState state);

// Restarts a killed engine if fuel remains; no-op otherwise.
VehicleState start_engine(VehicleState state);

// Fuel burn rate (L/h) at throttle fraction u, linear between idle and full.
double fuel_rate(const VehicleParams& params, double u);

// Hours of running from a full tank at constant throttle fraction u in [0, 1].
double fuel_endurance(const VehicleParams& params, double u);

}  // namespace jetyak
