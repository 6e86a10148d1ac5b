#include "jetyak/sim/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace jetyak {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

std::uint64_t every(double rate, double dt) {
  return std::max<std::uint64_t>(1, static_cast<std::uint64_t>(std::llround(1.0 / (rate * dt))));
}

SensorReportMsg report_of(const SensorSample& s) {
  SensorReportMsg r;
  r.kind = s.kind;
  r.quality = s.quality;
  r.t = s.t;
  r.pos = s.pos;
  r.psi = s.psi;
  r.values = s.values;
  return r;
}

const char* action_name(EventAction a) {
  switch (a) {
    case EventAction::Kill: return "kill";
    case EventAction::SetMode: return "set_mode";
    case EventAction::Velocity: return "velocity";
    case EventAction::SeverLink: return "sever_link";
    case EventAction::RestoreLink: return "restore_link";
    case EventAction::RcDisconnect: return "rc_disconnect";
    case EventAction::RcConnect: return "rc_connect";
    case EventAction::SetCh5: return "set_ch5";
    case EventAction::SetCh6: return "set_ch6";
    case EventAction::PowerLoss: return "power_loss";
    case EventAction::PowerRestore: return "power_restore";
    case EventAction::HwManual: return "hw_manual";
    case EventAction::HwAuto: return "hw_auto";
    case EventAction::OverrideOn: return "override_on";
    case EventAction::OverrideOff: return "override_off";
    case EventAction::StartEngine: return "start_engine";
  }
  return "?";
}

}  // namespace

VehicleNode::VehicleNode(const Scenario& scenario, const VehicleSpec& spec, Rng rng)
    : scenario_(scenario),
      spec_(spec),
      rng_(rng),
      state_(initial_state(scenario.params, spec.start, Heading(spec.heading))),
      autopilot_(std::make_unique<Autopilot>(scenario.autopilot, scenario.params, scenario.origin)),
      receiver_(TransferConfig{}),
      rc_(spec.rc),
      rc_connected_(spec.rc_connected),
      safety_(spec.safety),
      depth_on_(spec.depth_sensor),
      wind_on_(spec.wind_sensor),
      current_on_(spec.current_sensor) {
  const PwmSignal steer_trim{scenario.params.steering_servo.trim_us()};
  const PwmSignal throttle_trim{scenario.params.throttle_servo.trim_us()};
  joystick_ = JoystickInput{steer_trim, throttle_trim};
  last_.steering = steer_trim;
  last_.throttle = throttle_trim;
  if (!rc_connected_) rc_.age = scenario.autopilot.modes.rc_timeout * 2.0;
}

void VehicleNode::start_engine() {
  autopilot_->clear_remote_kill();
  state_ = jetyak::start_engine(state_);
}

void VehicleNode::set_sensor_enabled(SensorKind kind, bool enabled) {
  switch (kind) {
    case SensorKind::Depth: depth_on_ = enabled; break;
    case SensorKind::Wind: wind_on_ = enabled; break;
    case SensorKind::Current: current_on_ = enabled; break;
  }
}

void VehicleNode::activate(const Mission& mission, double now, const RecordSink& sink) {
  autopilot_->load_mission(mission, state_.pos);
  MissionActivatedRec rec;
  rec.t = now;
  rec.sys_id = spec_.sys_id;
  rec.mission_id = mission.id;
  rec.wp_radius = autopilot_->config().gains.wp_radius;
  rec.start_x = state_.pos.x();
  rec.start_y = state_.pos.y();
  for (const LocalPoint& p : autopilot_->guidance().waypoints()) {
    rec.xy.push_back(p.x());
    rec.xy.push_back(p.y());
  }
  if (sink) sink(rec);
}

void VehicleNode::handle(const Frame& frame, double now, std::vector<Message>& replies, const RecordSink& sink) {
  if (frame.sys_id != spec_.sys_id) return;
  auto to_receiver = [&](const Message& m) {
    for (Message& r : receiver_.on_message(m, now)) replies.push_back(std::move(r));
    if (auto done = receiver_.take_completed()) activate(*done, now, sink);
  };
  std::visit(Overloaded{
                 [&](const HeartbeatMsg&) { last_gcs_heartbeat_ = now; },
                 [&](const SetModeMsg& m) { autopilot_->enqueue(SetModeCommand{m.mode}); },
                 [&](const KillMsg&) { autopilot_->enqueue(KillCommand{}); },
                 [&](const VelocitySetpointMsg& m) {
                   autopilot_->enqueue(VelocitySetpoint{m.steering, m.speed});
                 },
                 [&](const MissionCountMsg& m) { to_receiver(m); },
                 [&](const MissionItemMsg& m) { to_receiver(m); },
                 [](const auto&) {},
             },
             frame.message);
}

std::vector<Message> VehicleNode::tick(std::uint64_t k, double dt, const RecordSink& sink) {
  const double now = state_.t;
  std::vector<Message> up;
  for (Message& m : receiver_.poll(now)) up.push_back(std::move(m));

  rc_.age = rc_connected_ ? 0.0 : rc_.age + dt;
  const TickOutputs out = autopilot_->control_tick(TickInputs{rc_, safety_, joystick_}, state_, dt);
  for (std::size_t idx : out.reached_waypoints) {
    if (sink) sink(WaypointReachedRec{now, spec_.sys_id, static_cast<std::uint32_t>(idx)});
  }
  if (out.engine == EngineCommand::Killed && state_.engine == EngineStatus::Running) state_ = apply_kill(state_);
  last_ = out;
  state_ = step(state_, scenario_.params, out.steering, out.throttle, scenario_.env, dt);

  if (k % every(scenario_.heartbeat_rate, dt) == 0) {
    const bool armed = out.engine == EngineCommand::Allowed && state_.engine == EngineStatus::Running;
    up.push_back(HeartbeatMsg{out.mode, state_.engine, armed});
  }
  if (k % every(scenario_.telemetry_rate, dt) == 0) {
    TelemetryMsg tm;
    tm.geo = local_to_geo(scenario_.origin, state_.pos);
    tm.psi = state_.psi.radians();
    tm.v_water = state_.v_water;
    tm.v_ground_east = state_.v_ground.x();
    tm.v_ground_north = state_.v_ground.y();
    tm.fuel = state_.fuel;
    tm.t = state_.t;
    up.push_back(tm);
  }
  const SensorConfig& sc = scenario_.sensors;
  if (depth_on_ && k % every(scenario_.depth_rate, dt) == 0) {
    samples_.push_back(sample_depth(scenario_.env, state_, scenario_.origin, rng_, sc.depth_noise_sd,
                                    sc.aeration, spec_.sys_id));
    up.push_back(report_of(samples_.back()));
  }
  if (k % every(scenario_.flow_rate, dt) == 0) {
    for (SensorKind kind : {SensorKind::Wind, SensorKind::Current}) {
      if ((kind == SensorKind::Wind && !wind_on_) || (kind == SensorKind::Current && !current_on_)) continue;
      samples_.push_back(
          sample_flow(scenario_.env, state_, scenario_.origin, rng_, kind, sc.flow_noise_sd, spec_.sys_id));
      up.push_back(report_of(samples_.back()));
    }
  }

  if (sink) {
    VehicleStateRec r;
    r.t = state_.t;
    r.sys_id = spec_.sys_id;
    r.x = state_.pos.x();
    r.y = state_.pos.y();
    r.psi = state_.psi.radians();
    r.v_water = state_.v_water;
    r.vg_east = state_.v_ground.x();
    r.vg_north = state_.v_ground.y();
    r.fuel = state_.fuel;
    r.engine = static_cast<std::uint8_t>(state_.engine);
    r.mode = static_cast<std::uint8_t>(out.mode);
    r.active_index = static_cast<std::uint32_t>(autopilot_->guidance().active_index());
    sink(r);
  }
  return up;
}

Simulation::Simulation(Scenario scenario, RecordSink sink) : scenario_(std::move(scenario)), sink_(std::move(sink)) {
  scenario_.params.validate();
  scenario_.link.validate();
  if (!(scenario_.dt > 0.0 && scenario_.dt <= 0.1)) throw std::invalid_argument("scenario dt must be in (0, 0.1]");
  emit(SessionStartRec{scenario_.seed, scenario_.dt, scenario_.origin.lat, scenario_.origin.lon, scenario_.name});

  Rng root(scenario_.seed);
  std::vector<VehicleSpec> specs = scenario_.vehicles;
  std::sort(specs.begin(), specs.end(), [](const VehicleSpec& a, const VehicleSpec& b) { return a.sys_id < b.sys_id; });
  for (const VehicleSpec& spec : specs) {
    Rng sensor_rng = root.fork(spec.sys_id);
    Rng up_rng = root.fork(0x100u + spec.sys_id);
    Rng down_rng = root.fork(0x200u + spec.sys_id);
    auto node = std::make_unique<VehicleNode>(scenario_, spec, sensor_rng);
    Links links{std::make_unique<LinkChannel>(scenario_.link, up_rng),
                std::make_unique<LinkChannel>(scenario_.link, down_rng)};
    if (spec.mission && spec.source == MissionSource::Onboard) {
      node->activate(*spec.mission, 0.0, [this](const LogRecord& r) { emit(r); });
    }
    links_.emplace(spec.sys_id, std::move(links));
    nodes_.emplace(spec.sys_id, std::move(node));
  }
}

void Simulation::emit(const LogRecord& r) const {
  if (sink_) sink_(r);
}

std::vector<std::uint8_t> Simulation::sys_ids() const {
  std::vector<std::uint8_t> out;
  for (const auto& [id, node] : nodes_) out.push_back(id);
  return out;
}

VehicleNode& Simulation::node(std::uint8_t sys_id) {
  auto it = nodes_.find(sys_id);
  if (it == nodes_.end()) throw std::out_of_range("no vehicle with sys_id " + std::to_string(sys_id));
  return *it->second;
}

const VehicleNode& Simulation::node(std::uint8_t sys_id) const {
  auto it = nodes_.find(sys_id);
  if (it == nodes_.end()) throw std::out_of_range("no vehicle with sys_id " + std::to_string(sys_id));
  return *it->second;
}

double Simulation::distance_to_gcs(std::uint8_t sys_id) const {
  return (node(sys_id).state().pos - scenario_.gcs_pos).norm();
}

void Simulation::set_link_severed(std::uint8_t sys_id, bool severed) {
  Links& l = links_.at(sys_id);
  l.up->set_severed(severed);
  l.down->set_severed(severed);
}

bool Simulation::send(std::uint8_t sys_id, const Message& message) {
  auto it = links_.find(sys_id);
  if (it == links_.end()) throw std::out_of_range("no vehicle with sys_id " + std::to_string(sys_id));
  std::vector<std::uint8_t> bytes = encode(message, shore_seq_++, sys_id);
  FrameSentRec rec{t_, sys_id, LinkDirection::Down, false, bytes};
  rec.delivered = it->second.down->send(std::move(bytes), t_, distance_to_gcs(sys_id));
  emit(rec);
  return rec.delivered;
}

std::vector<std::pair<Frame, std::vector<std::uint8_t>>> Simulation::receive() {
  std::vector<std::pair<Frame, std::vector<std::uint8_t>>> out;
  for (auto& [id, links] : links_) {
    for (std::vector<std::uint8_t>& bytes : links.up->receive(t_)) {
      emit(FrameReceivedGcsRec{t_, id, bytes});
      DecodeResult r = decode(bytes);
      if (auto* f = std::get_if<Frame>(&r)) out.emplace_back(std::move(*f), std::move(bytes));
    }
  }
  return out;
}

void Simulation::log_command(std::uint8_t sys_id, const std::string& text) {
  emit(CommandRec{t_, sys_id, text});
}

void Simulation::apply_event(const ScenarioEvent& e) {
  VehicleNode& n = node(e.sys_id);
  std::string text = std::string("event ") + action_name(e.action);
  switch (e.action) {
    case EventAction::Kill:
    case EventAction::SetMode:
    case EventAction::Velocity:
      if (command_hook_) {
        command_hook_(e);
        return;
      }
      if (e.action == EventAction::Kill) send(e.sys_id, KillMsg{});
      if (e.action == EventAction::SetMode) send(e.sys_id, SetModeMsg{*e.mode});
      if (e.action == EventAction::Velocity) send(e.sys_id, VelocitySetpointMsg{e.value, e.speed});
      break;
    case EventAction::SeverLink: set_link_severed(e.sys_id, true); break;
    case EventAction::RestoreLink: set_link_severed(e.sys_id, false); break;
    case EventAction::RcDisconnect: n.set_rc_connected(false); break;
    case EventAction::RcConnect: n.set_rc_connected(true); break;
    case EventAction::SetCh5: n.rc().ch5_us = e.value; break;
    case EventAction::SetCh6: n.rc().ch6_us = e.value; break;
    case EventAction::PowerLoss: n.safety().autopilot_powered = false; break;
    case EventAction::PowerRestore: n.safety().autopilot_powered = true; break;
    case EventAction::HwManual: n.safety().hw_manual_switch = true; break;
    case EventAction::HwAuto: n.safety().hw_manual_switch = false; break;
    case EventAction::OverrideOn: n.safety().kill_override = true; break;
    case EventAction::OverrideOff: n.safety().kill_override = false; break;
    case EventAction::StartEngine: n.start_engine(); break;
  }
  log_command(e.sys_id, text);
}

void Simulation::step() {
  if (finished_) throw std::logic_error("simulation already finished");
  const double dt = scenario_.dt;
  while (next_event_ < scenario_.events.size() && scenario_.events[next_event_].t <= t_ + 1e-9) {
    apply_event(scenario_.events[next_event_++]);
  }
  const RecordSink sink = [this](const LogRecord& r) { emit(r); };
  for (auto& [id, node] : nodes_) {
    Links& links = links_.at(id);
    std::vector<Message> up;
    for (const std::vector<std::uint8_t>& bytes : links.down->receive(t_)) {
      DecodeResult r = decode(bytes);
      if (const auto* f = std::get_if<Frame>(&r)) node->handle(*f, t_, up, sink);
    }
    for (Message& m : node->tick(tick_, dt, sink)) up.push_back(std::move(m));
    // Positions are taken after the step, when the frames leave the antenna.
    const double d = distance_to_gcs(id);
    for (const Message& m : up) {
      std::vector<std::uint8_t> bytes = encode(m, node->seq_++, id);
      FrameSentRec rec{t_, id, LinkDirection::Up, false, bytes};
      rec.delivered = links.up->send(std::move(bytes), t_, d);
      emit(rec);
    }
  }
  ++tick_;
  t_ = static_cast<double>(tick_) * dt;
}

bool Simulation::finished() const {
  if (finished_ || t_ >= scenario_.duration - 1e-9) return true;
  if (!scenario_.stop_when_done || next_event_ < scenario_.events.size()) return false;
  bool any = false;
  for (const auto& [id, node] : nodes_) {
    if (!node->spec_.mission) continue;
    any = true;
    if (!node->autopilot().mission_done()) return false;
  }
  return any;
}

void Simulation::finish() {
  if (finished_) return;
  emit(SessionEndRec{t_});
  finished_ = true;
}

std::vector<SensorSample> Simulation::all_samples() const {
  std::vector<SensorSample> out;
  for (const auto& [id, node] : nodes_) out.insert(out.end(), node->samples().begin(), node->samples().end());
  std::stable_sort(out.begin(), out.end(), [](const SensorSample& a, const SensorSample& b) {
    return a.t < b.t || (a.t == b.t && a.sys_id < b.sys_id);
  });
  return out;
}

}  // namespace jetyak
