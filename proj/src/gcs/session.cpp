#include "jetyak/gcs/session.hpp"

#include <chrono>
#include <cmath>
#include <sstream>

namespace jetyak {

namespace {

std::string fmt(double v, int precision = 3) {
  std::ostringstream os;
  os.setf(std::ios::fixed);
  os.precision(precision);
  os << v;
  return os.str();
}

nlohmann::ordered_json telemetry_json(const TelemetryMsg& t) {
  nlohmann::ordered_json j;
  j["lat"] = t.geo.lat;
  j["lon"] = t.geo.lon;
  j["psi"] = t.psi;
  j["v_water"] = t.v_water;
  j["v_ground"] = {t.v_ground_east, t.v_ground_north};
  j["fuel"] = t.fuel;
  j["t"] = t.t;
  return j;
}

nlohmann::ordered_json entry_json(const FleetEntry& e, double now, double period) {
  nlohmann::ordered_json j;
  j["sys_id"] = e.sys_id;
  j["link_state"] = std::string(to_string(e.link_state(now, period)));
  const double age = e.heartbeat_age(now);
  j["heartbeat_age"] = std::isfinite(age) ? nlohmann::ordered_json(age) : nlohmann::ordered_json(nullptr);
  if (e.heartbeat) {
    j["mode"] = std::string(to_string(e.heartbeat->mode));
    j["engine"] = std::string(to_string(e.heartbeat->engine));
    j["armed"] = e.heartbeat->armed;
  } else {
    j["mode"] = nullptr;
    j["engine"] = nullptr;
    j["armed"] = nullptr;
  }
  j["telemetry"] = e.telemetry ? telemetry_json(*e.telemetry) : nlohmann::ordered_json(nullptr);
  j["active_mission"] = e.active_mission ? nlohmann::ordered_json(*e.active_mission) : nlohmann::ordered_json(nullptr);
  j["frames"] = e.frames;
  return j;
}

}  // namespace

std::string_view to_string(ChecklistStage s) {
  return s == ChecklistStage::EngineOff ? "engine_off" : "engine_on";
}

bool ChecklistReport::passed() const {
  if (items.empty()) return false;
  for (const ChecklistItem& i : items) {
    if (!i.passed) return false;
  }
  return true;
}

const ChecklistItem* ChecklistReport::item(const std::string& name) const {
  for (const ChecklistItem& i : items) {
    if (i.name == name) return &i;
  }
  return nullptr;
}

nlohmann::ordered_json ChecklistReport::to_json() const {
  nlohmann::ordered_json j;
  j["sys_id"] = sys_id;
  j["passed"] = passed();
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const ChecklistItem& i : items) {
    arr.push_back({{"name", i.name},
                   {"stage", std::string(to_string(i.stage))},
                   {"status", i.passed ? "pass" : "fail"},
                   {"detail", i.detail}});
  }
  j["items"] = arr;
  return j;
}

Session::Session(Scenario scenario, std::ostream* log, RecordSink extra) : extra_(std::move(extra)) {
  assign_survey_missions(scenario);
  if (log) writer_ = std::make_unique<EventLogWriter>(*log);
  sim_ = std::make_unique<Simulation>(std::move(scenario), [this](const LogRecord& r) {
    if (writer_) writer_->write(r);
    metrics_.consume(r);
    if (extra_) extra_(r);
  });
  const Scenario& sc = sim_->scenario();
  gcs_ = std::make_unique<GroundStation>(*sim_, sim_->sys_ids(), 1.0 / sc.heartbeat_rate);
  gcs_->set_kill_mirror([this](std::uint8_t id) {
    VehicleNode& n = sim_->node(id);
    if (n.rc_connected()) n.rc().ch6_us = 1000.0;
  });
  sim_->set_command_hook([this](const ScenarioEvent& e) {
    switch (e.action) {
      case EventAction::Kill: gcs_->command(e.sys_id, KillMsg{}); break;
      case EventAction::SetMode: gcs_->command(e.sys_id, SetModeMsg{*e.mode}); break;
      case EventAction::Velocity: gcs_->command(e.sys_id, VelocitySetpointMsg{e.value, e.speed}); break;
      default: break;
    }
  });
  for (const VehicleSpec& v : sc.vehicles) {
    if (v.mission && v.source == MissionSource::Upload) gcs_->start_upload(v.sys_id, *v.mission, true);
  }
}

Session::~Session() { stop_background(); }

void Session::step_locked() {
  gcs_->process();
  sim_->step();
}

void Session::step() {
  std::lock_guard<std::recursive_mutex> lock(mutex_);
  step_locked();
}

bool Session::finished() const {
  std::lock_guard<std::recursive_mutex> lock(mutex_);
  return sim_->finished();
}

void Session::finish() {
  std::lock_guard<std::recursive_mutex> lock(mutex_);
  sim_->finish();
}

std::uint64_t Session::run(std::uint64_t max_ticks) {
  std::lock_guard<std::recursive_mutex> lock(mutex_);
  std::uint64_t n = 0;
  while (n < max_ticks && !sim_->finished()) {
    step_locked();
    ++n;
  }
  return n;
}

bool Session::run_until_locked(const std::function<bool()>& pred, double timeout) {
  const double end = sim_->now() + timeout;
  while (!pred()) {
    if (sim_->now() >= end - 1e-9) return false;
    step_locked();
  }
  return true;
}

bool Session::run_until(const std::function<bool()>& pred, double timeout) {
  std::lock_guard<std::recursive_mutex> lock(mutex_);
  return run_until_locked(pred, timeout);
}

void Session::start_background(double time_scale) {
  if (running_.exchange(true)) return;
  stop_ = false;
  loop_ = std::thread([this, time_scale] {
    using clock = std::chrono::steady_clock;
    const auto wall0 = clock::now();
    const double sim0 = now();
    while (!stop_) {
      bool stepped = false;
      {
        std::lock_guard<std::recursive_mutex> lock(mutex_);
        const double elapsed = std::chrono::duration<double>(clock::now() - wall0).count();
        const bool due = time_scale <= 0.0 || sim_->now() - sim0 < elapsed * time_scale;
        if (due && sim_->now() < sim_->scenario().duration - 1e-9) {
          step_locked();
          stepped = true;
        }
      }
      if (!stepped) std::this_thread::sleep_for(std::chrono::milliseconds(2));
    }
  });
}

void Session::stop_background() {
  if (!running_.load()) return;
  stop_ = true;
  if (loop_.joinable()) loop_.join();
  running_ = false;
}

double Session::now() const {
  std::lock_guard<std::recursive_mutex> lock(mutex_);
  return sim_->now();
}

RunMetrics Session::metrics() const {
  std::lock_guard<std::recursive_mutex> lock(mutex_);
  return metrics_.result();
}

CommandResult Session::command(std::uint8_t sys_id, const GcsCommand& cmd) {
  std::lock_guard<std::recursive_mutex> lock(mutex_);
  return gcs_->command(sys_id, cmd);
}

CommandResult Session::start_upload(std::uint8_t sys_id, const Mission& mission, bool activate) {
  std::lock_guard<std::recursive_mutex> lock(mutex_);
  return gcs_->start_upload(sys_id, mission, activate);
}

UploadStatus Session::upload_status(std::uint8_t sys_id) const {
  std::lock_guard<std::recursive_mutex> lock(mutex_);
  return gcs_->upload_status(sys_id);
}

UploadResult Session::upload_and_activate(std::uint8_t sys_id, const Mission& mission, double timeout) {
  std::lock_guard<std::recursive_mutex> lock(mutex_);
  UploadResult out;
  const double t0 = sim_->now();
  const CommandResult r = gcs_->start_upload(sys_id, mission, true);
  if (!r.accepted) {
    out.state = UploadState::Failed;
    return out;
  }
  run_until_locked([&] { return gcs_->upload_status(sys_id).state != UploadState::InProgress; }, timeout);
  out.state = gcs_->upload_status(sys_id).state;
  if (out.state == UploadState::InProgress) out.state = UploadState::Failed;
  if (out.state == UploadState::Accepted) {
    out.activated = run_until_locked(
        [&] { return sim_->node(sys_id).autopilot().mode() == Mode::AutoWpOffboard; }, 3.0);
  }
  out.elapsed = sim_->now() - t0;
  return out;
}

void Session::clear_kill(std::uint8_t sys_id) {
  std::lock_guard<std::recursive_mutex> lock(mutex_);
  VehicleNode& n = sim_->node(sys_id);
  const VehicleSpec* spec = sim_->scenario().vehicle(sys_id);
  const double kill_below = sim_->scenario().autopilot.modes.kill_below_us;
  if (n.rc().ch6_us < kill_below) n.rc().ch6_us = spec && spec->rc.ch6_us >= kill_below ? spec->rc.ch6_us : 1900.0;
  n.start_engine();
  sim_->log_command(sys_id, "operator cleared kill");
}

ChecklistReport Session::preflight(std::uint8_t sys_id) {
  std::lock_guard<std::recursive_mutex> lock(mutex_);
  return preflight_locked(sys_id);
}

ChecklistReport Session::preflight_locked(std::uint8_t sys_id) {
  ChecklistReport report;
  report.sys_id = sys_id;
  using S = ChecklistStage;
  const std::vector<std::pair<std::string, S>> plan = {
      {"link_heartbeat", S::EngineOff}, {"steering_sweep", S::EngineOff}, {"throttle_sweep", S::EngineOff},
      {"kill_circuit", S::EngineOff},   {"mode_cycle", S::EngineOff},     {"engine_start", S::EngineOn},
      {"kill_stop", S::EngineOn},       {"sensor_stream", S::EngineOn},
  };
  auto add = [&](const std::string& name, S stage, bool ok, std::string detail) {
    report.items.push_back({name, stage, ok, std::move(detail)});
  };

  const FleetEntry* entry = gcs_->fleet().find(sys_id);
  if (!entry) {
    for (const auto& [name, stage] : plan) add(name, stage, false, "unknown vehicle");
    return report;
  }
  sim_->log_command(sys_id, "preflight start");
  // Let a heartbeat arrive if the session has just started.
  run_until_locked([&] { return gcs_->link_state(sys_id) == LinkState::Connected; }, 1.5);
  if (gcs_->link_state(sys_id) == LinkState::Lost) {
    const std::string detail = "link lost: no heartbeat for " + fmt(entry->heartbeat_age(sim_->now()), 1) + " s";
    for (const auto& [name, stage] : plan) add(name, stage, false, detail);
    sim_->log_command(sys_id, "preflight aborted (link lost)");
    return report;
  }

  VehicleNode& node = sim_->node(sys_id);
  const VehicleParams& params = sim_->scenario().params;
  const double tick = sim_->scenario().dt;
  const double latency = sim_->scenario().link.latency;
  const double cmd_wait = latency + 4.0 * tick + 0.5;
  const double hb_wait = gcs_->fleet().heartbeat_period() * 2.5 + latency;
  const bool was_running = node.state().engine == EngineStatus::Running;
  const Mode initial_mode = node.autopilot().mode();

  auto heartbeat_mode = [&]() -> std::optional<Mode> {
    const FleetEntry* e = gcs_->fleet().find(sys_id);
    return e && e->heartbeat ? std::optional<Mode>(e->heartbeat->mode) : std::nullopt;
  };
  auto heartbeat_engine = [&]() -> std::optional<EngineStatus> {
    const FleetEntry* e = gcs_->fleet().find(sys_id);
    return e && e->heartbeat ? std::optional<EngineStatus>(e->heartbeat->engine) : std::nullopt;
  };
  // Lossy links drop single frames; the operator repeats a command that had
  // no visible effect.
  auto command_until = [&](const GcsCommand& cmd, const std::function<bool()>& pred, double wait) {
    for (int attempt = 0; attempt < 3; ++attempt) {
      gcs_->command(sys_id, cmd);
      if (run_until_locked(pred, wait)) return true;
    }
    return false;
  };
  auto set_mode = [&](Mode m) {
    return command_until(SetModeMsg{m}, [&] { return node.autopilot().mode() == m; }, cmd_wait);
  };

  // Engine-off stage: the operator stops the engine on the bench.
  node.stop_engine();

  {
    const double age = gcs_->fleet().find(sys_id)->heartbeat_age(sim_->now());
    add("link_heartbeat", S::EngineOff, gcs_->link_state(sys_id) == LinkState::Connected,
        "heartbeat age " + fmt(age, 2) + " s, link " + std::string(to_string(gcs_->link_state(sys_id))));
  }

  {
    bool ok = set_mode(Mode::VelocityControl);
    std::string detail = ok ? "" : "vehicle did not enter VELOCITY_CONTROL; ";
    for (double f : {-1.0, -0.5, 0.0, 0.5, 1.0}) {
      const double want = normalized_to_pwm(f, params.steering_servo).pulse_us;
      const bool hit = command_until(
          VelocitySetpointMsg{f, 0.0}, [&] { return std::abs(node.last_outputs().steering.pulse_us - want) <= 0.5; },
          cmd_wait);
      if (!hit) {
        ok = false;
        detail += "fraction " + fmt(f, 2) + " expected " + fmt(want, 1) + " us got " +
                  fmt(node.last_outputs().steering.pulse_us, 1) + " us; ";
      }
    }
    add("steering_sweep", S::EngineOff, ok, ok ? "5 fractions reflected in steering PWM" : detail);
  }

  {
    bool ok = node.autopilot().mode() == Mode::VelocityControl;
    std::string detail;
    double prev = -1.0;
    const double gain = sim_->scenario().autopilot.guidance.speed_gain;
    for (double frac : {0.0, 0.5, 1.0}) {
      const double speed = frac * params.v_max;
      const bool hit = command_until(
          VelocitySetpointMsg{0.0, speed},
          [&] {
            const double want =
                normalized_to_pwm(speed_loop(speed, node.state().v_water, params.v_max, gain), params.throttle_servo)
                    .pulse_us;
            return std::abs(node.last_outputs().throttle.pulse_us - want) <= 0.5;
          },
          cmd_wait);
      const double got = node.last_outputs().throttle.pulse_us;
      if (!hit || got < prev) {
        ok = false;
        detail += "speed " + fmt(speed, 2) + " m/s gave " + fmt(got, 1) + " us; ";
      }
      prev = got;
    }
    gcs_->command(sys_id, VelocitySetpointMsg{0.0, 0.0});
    run_until_locked([] { return false; }, cmd_wait);
    add("throttle_sweep", S::EngineOff, ok, ok ? "throttle PWM follows commanded speed" : detail);
  }

  {
    // Wait for the command itself, not just the RC kill channel mirrored
    // on the transmitter, so a late frame cannot re-latch after the clear.
    const bool asserted = command_until(
        KillMsg{},
        [&] { return node.last_outputs().engine == EngineCommand::Killed && node.autopilot().remote_kill_latched(); },
        cmd_wait);
    std::string detail;
    bool ok = asserted;
    if (!asserted) {
      detail = node.safety().kill_override ? "kill command did not assert: kill override switch is engaged"
                                           : "kill command did not assert within " + fmt(cmd_wait, 2) + " s";
    }
    clear_kill(sys_id);
    node.stop_engine();
    const bool cleared =
        run_until_locked([&] { return node.last_outputs().engine == EngineCommand::Allowed; }, cmd_wait);
    if (asserted && !cleared) {
      ok = false;
      detail = "kill asserted but did not clear";
    }
    add("kill_circuit", S::EngineOff, ok, ok ? "kill asserted and cleared" : detail);
  }

  {
    bool ok = true;
    std::string detail;
    for (Mode m : {Mode::ManualRc, Mode::AutoWpOffboard, Mode::AutoWpOnboard, Mode::VelocityControl}) {
      if (!command_until(SetModeMsg{m}, [&] { return heartbeat_mode() == m; }, hb_wait)) {
        ok = false;
        detail += std::string(to_string(m)) + " not reported; ";
      }
    }
    const bool hw = node.safety().hw_manual_switch;
    node.safety().hw_manual_switch = true;
    if (!run_until_locked([&] { return heartbeat_mode() == Mode::ManualOnboard; }, hb_wait)) {
      ok = false;
      detail += "MANUAL_ONBOARD not reported; ";
    }
    node.safety().hw_manual_switch = hw;
    set_mode(Mode::VelocityControl);
    add("mode_cycle", S::EngineOff, ok, ok ? "all five modes resolved and reported" : detail);
  }

  // Engine-on stage.
  {
    node.start_engine();
    const bool ok = run_until_locked([&] { return heartbeat_engine() == EngineStatus::Running; }, hb_wait);
    add("engine_start", S::EngineOn, ok, ok ? "engine running reported" : "engine did not report running");
  }

  {
    const double t0 = sim_->now();
    gcs_->command(sys_id, KillMsg{});
    const bool stopped =
        run_until_locked([&] { return node.state().engine == EngineStatus::Killed; }, cmd_wait);
    const double latency_s = sim_->now() - t0;
    const bool reported = stopped && run_until_locked([&] { return heartbeat_engine() == EngineStatus::Killed; }, hb_wait);
    std::string detail;
    if (!stopped) {
      detail = node.safety().kill_override ? "engine kept running: kill override switch is engaged"
                                           : "engine kept running after kill";
    } else if (!reported) {
      detail = "engine stopped but the stop was not reported";
    } else {
      detail = "engine stopped " + fmt(latency_s, 2) + " s after the command";
    }
    add("kill_stop", S::EngineOn, stopped && reported, detail);
    run_until_locked([&] { return node.autopilot().remote_kill_latched(); }, cmd_wait);
    clear_kill(sys_id);
  }

  {
    std::map<SensorKind, std::size_t> before;
    for (SensorKind k : {SensorKind::Depth, SensorKind::Wind, SensorKind::Current}) before[k] = gcs_->sample_count(sys_id, k);
    run_until_locked([] { return false; }, 2.0);
    bool ok = true;
    std::string detail;
    for (SensorKind k : {SensorKind::Depth, SensorKind::Wind, SensorKind::Current}) {
      const std::size_t n = gcs_->sample_count(sys_id, k) - before[k];
      if (n == 0) {
        ok = false;
        detail += "no " + std::string(to_string(k)) + " samples within 2 s; ";
      } else {
        detail += std::string(to_string(k)) + " " + std::to_string(n) + "; ";
      }
    }
    add("sensor_stream", S::EngineOn, ok, detail);
  }

  // Restore the bench state.
  if (initial_mode != Mode::ManualOnboard && initial_mode != node.autopilot().mode()) set_mode(initial_mode);
  if (!was_running) node.stop_engine();
  sim_->log_command(sys_id, std::string("preflight ") + (report.passed() ? "passed" : "failed"));
  return report;
}

nlohmann::ordered_json Session::fleet_json() const {
  std::lock_guard<std::recursive_mutex> lock(mutex_);
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const FleetEntry* e : gcs_->fleet().entries()) {
    arr.push_back(entry_json(*e, sim_->now(), gcs_->fleet().heartbeat_period()));
  }
  nlohmann::ordered_json j;
  j["t"] = sim_->now();
  j["vehicles"] = arr;
  j["quarantined_frames"] = gcs_->fleet().quarantined();
  return j;
}

std::optional<nlohmann::ordered_json> Session::vehicle_json(std::uint8_t sys_id) const {
  std::lock_guard<std::recursive_mutex> lock(mutex_);
  const FleetEntry* e = gcs_->fleet().find(sys_id);
  if (!e) return std::nullopt;
  nlohmann::ordered_json j = entry_json(*e, sim_->now(), gcs_->fleet().heartbeat_period());
  const UploadStatus up = gcs_->upload_status(sys_id);
  j["upload"] = {{"state", std::string(to_string(up.state))},
                 {"mission_id", up.mission_id},
                 {"activation_sent", up.activation_sent}};
  j["samples"] = {{"depth", gcs_->sample_count(sys_id, SensorKind::Depth)},
                  {"wind", gcs_->sample_count(sys_id, SensorKind::Wind)},
                  {"current", gcs_->sample_count(sys_id, SensorKind::Current)}};
  return j;
}

DepthGrid Session::depth_grid(double cell_size) const {
  std::lock_guard<std::recursive_mutex> lock(mutex_);
  GridConfig cfg;
  cfg.cell_size = cell_size;
  return grid_depth(filter_outliers(gcs_->samples()), sim_->scenario().origin, cfg);
}

std::vector<std::uint8_t> replay_stream(const std::vector<LogRecord>& records) {
  std::vector<std::uint8_t> out;
  for (const LogRecord& r : records) {
    if (const auto* f = std::get_if<FrameReceivedGcsRec>(&r)) {
      const std::vector<std::uint8_t> chunk = stream_chunk(f->bytes);
      out.insert(out.end(), chunk.begin(), chunk.end());
    }
  }
  return out;
}

}  // namespace jetyak
