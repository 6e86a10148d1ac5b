#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <vector>

#include "jetyak/autopilot/autopilot.hpp"
#include "jetyak/common/rng.hpp"
#include "jetyak/link/codec.hpp"
#include "jetyak/link/link_model.hpp"
#include "jetyak/link/mission_transfer.hpp"
#include "jetyak/sensors/pipeline.hpp"
#include "jetyak/sim/event_log.hpp"
#include "jetyak/sim/scenario.hpp"

namespace jetyak {

// Sink for log records; the simulation emits every record through it in a
// canonical order (by tick, then sys_id).
using RecordSink = std::function<void(const LogRecord&)>;

// One simulated Jetyak: plant, autopilot, mission receiver, RC transmitter,
// safety switches and sensors. Owned and stepped by Simulation.
class VehicleNode {
 public:
  VehicleNode(const Scenario& scenario, const VehicleSpec& spec, Rng rng);

  std::uint8_t sys_id() const { return spec_.sys_id; }
  const VehicleState& state() const { return state_; }
  const TickOutputs& last_outputs() const { return last_; }
  Autopilot& autopilot() { return *autopilot_; }
  const Autopilot& autopilot() const { return *autopilot_; }

  // Bench and scripted inputs.
  RcFrame& rc() { return rc_; }
  SafetyInputs& safety() { return safety_; }
  JoystickInput& joystick() { return joystick_; }
  void set_rc_connected(bool connected) { rc_connected_ = connected; }
  bool rc_connected() const { return rc_connected_; }
  // Restarts a killed engine (operator pull-start); clears a latched GCS kill.
  void start_engine();
  // Operator stops the engine (bench use); not a kill-circuit path.
  void stop_engine() { state_ = apply_kill(state_); }
  void set_sensor_enabled(SensorKind kind, bool enabled);

  const std::vector<SensorSample>& samples() const { return samples_; }
  double last_gcs_heartbeat() const { return last_gcs_heartbeat_; }

 private:
  friend class Simulation;

  // Handles one downlink frame; returns replies for the uplink.
  void handle(const Frame& frame, double now, std::vector<Message>& replies, const RecordSink& sink);
  void activate(const Mission& mission, double now, const RecordSink& sink);
  // Advances one tick and returns uplink messages due this tick.
  std::vector<Message> tick(std::uint64_t tick_index, double dt, const RecordSink& sink);

  const Scenario& scenario_;
  VehicleSpec spec_;
  Rng rng_;
  VehicleState state_;
  std::unique_ptr<Autopilot> autopilot_;
  MissionReceiver receiver_;
  RcFrame rc_;
  bool rc_connected_ = true;
  SafetyInputs safety_;
  JoystickInput joystick_;
  TickOutputs last_;
  bool depth_on_;
  bool wind_on_;
  bool current_on_;
  std::vector<SensorSample> samples_;
  double last_gcs_heartbeat_ = -1.0;
  std::uint8_t seq_ = 0;
};

// Shore side of every vehicle link, as seen by the ground station.
class ShoreLink {
 public:
  virtual ~ShoreLink() = default;
  virtual double now() const = 0;
  // Encodes and transmits; returns false if the link model dropped it.
  virtual bool send(std::uint8_t sys_id, const Message& message) = 0;
  // Frames delivered to the shore since the last call, in arrival order.
  virtual std::vector<std::pair<Frame, std::vector<std::uint8_t>>> receive() = 0;
  virtual void log_command(std::uint8_t sys_id, const std::string& text) = 0;
};

// Fixed-step fleet simulation. All randomness derives from the scenario
// seed; no wall-clock dependence.
class Simulation : public ShoreLink {
 public:
  // The scenario must already have its survey missions assigned.
  explicit Simulation(Scenario scenario, RecordSink sink = {});

  const Scenario& scenario() const { return scenario_; }
  double now() const override { return t_; }
  std::uint64_t ticks() const { return tick_; }

  // Advances every vehicle by one tick.
  void step();
  // True once the duration elapsed, or (with stop_when_done) every vehicle
  // with a mission finished it and no scripted events remain.
  bool finished() const;
  // Emits SessionEnd; further steps are not allowed.
  void finish();

  bool send(std::uint8_t sys_id, const Message& message) override;
  std::vector<std::pair<Frame, std::vector<std::uint8_t>>> receive() override;
  void log_command(std::uint8_t sys_id, const std::string& text) override;

  // Hook for GCS commands scripted in the scenario (kill, set_mode, velocity).
  using CommandHook = std::function<void(const ScenarioEvent&)>;
  void set_command_hook(CommandHook hook) { command_hook_ = std::move(hook); }

  std::vector<std::uint8_t> sys_ids() const;
  VehicleNode& node(std::uint8_t sys_id);
  const VehicleNode& node(std::uint8_t sys_id) const;
  void set_link_severed(std::uint8_t sys_id, bool severed);
  double distance_to_gcs(std::uint8_t sys_id) const;

  // All samples from every vehicle, ordered by (t, sys_id).
  std::vector<SensorSample> all_samples() const;

 private:
  struct Links {
    std::unique_ptr<LinkChannel> up;    // vehicle -> shore
    std::unique_ptr<LinkChannel> down;  // shore -> vehicle
  };

  void emit(const LogRecord& r) const;
  void apply_event(const ScenarioEvent& e);

  Scenario scenario_;
  RecordSink sink_;
  CommandHook command_hook_;
  std::map<std::uint8_t, std::unique_ptr<VehicleNode>> nodes_;
  std::map<std::uint8_t, Links> links_;
  std::vector<std::pair<Frame, std::vector<std::uint8_t>>> shore_inbox_;
  std::size_t next_event_ = 0;
  std::uint8_t shore_seq_ = 0;
  std::uint64_t tick_ = 0;
  double t_ = 0.0;
  bool finished_ = false;
};

}  // namespace jetyak
