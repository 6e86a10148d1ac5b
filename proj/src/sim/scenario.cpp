#include "jetyak/sim/scenario.hpp"

#include <algorithm>
#include <fstream>
#include <initializer_list>
#include <sstream>

#include "jetyak/coverage/mission_io.hpp"

namespace jetyak {

namespace {

using nlohmann::json;

// A JSON value plus its location, for error messages.
class Node {
 public:
  Node(const json& j, std::string path, const std::string& source) : j_(j), path_(std::move(path)), source_(source) {}

  [[noreturn]] void fail(const std::string& msg) const {
    throw ScenarioError(source_ + ": " + (path_.empty() ? std::string("<root>") : path_) + ": " + msg);
  }

  const json& raw() const { return j_; }
  const std::string& path() const { return path_; }

  void expect_object(std::initializer_list<const char*> allowed) const {
    if (!j_.is_object()) fail("expected an object");
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (std::none_of(allowed.begin(), allowed.end(), [&](const char* k) { return it.key() == k; })) {
        Node(it.value(), child_path(it.key()), source_).fail("unknown field");
      }
    }
  }

  bool has(const char* key) const { return j_.is_object() && j_.contains(key); }

  Node at(const char* key) const {
    if (!has(key)) Node(j_, child_path(key), source_).fail("missing required field");
    return Node(j_.at(key), child_path(key), source_);
  }

  Node index(std::size_t k) const { return Node(j_.at(k), path_ + "[" + std::to_string(k) + "]", source_); }

  std::size_t size() const {
    if (!j_.is_array()) fail("expected an array");
    return j_.size();
  }

  double number() const {
    if (!j_.is_number()) fail("expected a number");
    return j_.get<double>();
  }
  double number(double lo, double hi) const {
    const double v = number();
    if (!(v >= lo && v <= hi)) {
      std::ostringstream os;
      os << "value " << v << " outside [" << lo << ", " << hi << "]";
      fail(os.str());
    }
    return v;
  }
  double positive() const {
    const double v = number();
    if (!(v > 0.0) || !std::isfinite(v)) fail("expected a positive number");
    return v;
  }
  std::uint64_t unsigned_int(std::uint64_t hi) const {
    if (!j_.is_number_unsigned() && !(j_.is_number_integer() && j_.get<std::int64_t>() >= 0)) {
      fail("expected a non-negative integer");
    }
    const auto v = j_.get<std::uint64_t>();
    if (v > hi) fail("value above " + std::to_string(hi));
    return v;
  }
  bool boolean() const {
    if (!j_.is_boolean()) fail("expected true or false");
    return j_.get<bool>();
  }
  std::string string() const {
    if (!j_.is_string()) fail("expected a string");
    return j_.get<std::string>();
  }

  double number_or(const char* key, double def) const { return has(key) ? at(key).number() : def; }
  double positive_or(const char* key, double def) const { return has(key) ? at(key).positive() : def; }
  bool boolean_or(const char* key, bool def) const { return has(key) ? at(key).boolean() : def; }

 private:
  std::string child_path(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  const json& j_;
  std::string path_;
  const std::string& source_;
};

LocalPoint parse_local(const Node& n, const GeoPoint& origin, bool allow_speed = false) {
  if (n.has("lat") || n.has("lon")) {
    if (allow_speed) {
      n.expect_object({"lat", "lon", "speed"});
    } else {
      n.expect_object({"lat", "lon"});
    }
    const GeoPoint g{n.at("lat").number(-90, 90), n.at("lon").number(-180, 180)};
    try {
      return geo_to_local(origin, g);
    } catch (const std::exception& e) {
      n.fail(e.what());
    }
  }
  if (allow_speed) {
    n.expect_object({"east", "north", "speed"});
  } else {
    n.expect_object({"east", "north"});
  }
  return LocalPoint(n.at("east").number(), n.at("north").number());
}

GeoPoint parse_geo(const Node& n, const GeoPoint& origin, bool allow_speed = false) {
  if (n.has("lat") || n.has("lon")) {
    parse_local(n, origin, allow_speed);
    return GeoPoint{n.at("lat").number(-90, 90), n.at("lon").number(-180, 180)};
  }
  const LocalPoint p = parse_local(n, origin, allow_speed);
  try {
    return local_to_geo(origin, p);
  } catch (const std::exception& e) {
    n.fail(e.what());
  }
}

double heading_field(const Node& n, const char* key, double def_rad) {
  return n.has(key) ? deg_to_rad(n.at(key).number()) : def_rad;
}

FlowModel parse_flow(const Node& n) {
  const std::string type = n.has("type") ? n.at("type").string() : "uniform";
  if (type == "uniform") {
    n.expect_object({"type", "east", "north"});
    return UniformFlow{Vector2(n.number_or("east", 0.0), n.number_or("north", 0.0))};
  }
  if (type == "shear") {
    n.expect_object({"type", "centerline", "direction_deg", "max_speed", "half_width"});
    ShearChannel s;
    if (n.has("centerline")) s.centerline_point = parse_local(n.at("centerline"), GeoPoint{0, 0});
    s.direction = heading_field(n, "direction_deg", 0.0);
    s.max_speed = n.number_or("max_speed", 0.0);
    s.half_width = n.positive_or("half_width", s.half_width);
    return s;
  }
  if (type == "vortex") {
    n.expect_object({"type", "center", "peak_speed", "core_radius"});
    Vortex v;
    if (n.has("center")) v.center = parse_local(n.at("center"), GeoPoint{0, 0});
    v.peak_speed = n.number_or("peak_speed", 0.0);
    v.core_radius = n.positive_or("core_radius", v.core_radius);
    return v;
  }
  n.at("type").fail("unknown flow type '" + type + "' (uniform, shear, vortex)");
}

std::variant<FlatBottom, RampBottom> parse_bottom(const Node& n) {
  const std::string type = n.has("type") ? n.at("type").string() : "flat";
  if (type == "flat") {
    n.expect_object({"type", "depth"});
    FlatBottom b;
    b.depth = n.has("depth") ? n.at("depth").number(0.0, 1e5) : b.depth;
    return b;
  }
  if (type == "ramp") {
    n.expect_object({"type", "origin", "depth_at_origin", "gradient_east", "gradient_north"});
    RampBottom b;
    if (n.has("origin")) b.origin = parse_local(n.at("origin"), GeoPoint{0, 0});
    b.depth_at_origin = n.number_or("depth_at_origin", b.depth_at_origin);
    b.gradient = Vector2(n.number_or("gradient_east", 0.0), n.number_or("gradient_north", 0.0));
    return b;
  }
  n.at("type").fail("unknown bottom type '" + type + "' (flat, ramp)");
}

ServoCalibration parse_servo(const Node& n) {
  n.expect_object({"min_us", "trim_us", "max_us", "reversed"});
  try {
    return ServoCalibration(n.number_or("min_us", 1100.0), n.number_or("trim_us", 1500.0),
                            n.number_or("max_us", 1900.0), n.boolean_or("reversed", false));
  } catch (const std::exception& e) {
    n.fail(e.what());
  }
}

Mode parse_mode(const Node& n) {
  const auto m = mode_from_string(n.string());
  if (!m) n.fail("unknown mode '" + n.string() + "'");
  return *m;
}

MissionSource parse_source(const Node& n) {
  const std::string s = n.string();
  if (s == "onboard") return MissionSource::Onboard;
  if (s == "upload") return MissionSource::Upload;
  if (s == "none") return MissionSource::None;
  n.fail("expected 'onboard', 'upload' or 'none'");
}

Mission parse_mission(const Node& n, const GeoPoint& origin, const std::filesystem::path& base,
                      std::uint16_t default_id) {
  n.expect_object({"source", "file", "id", "waypoints", "speed"});
  if (n.has("file")) {
    const std::filesystem::path p = base / n.at("file").string();
    try {
      return load_mission(p);
    } catch (const std::exception& e) {
      n.at("file").fail(e.what());
    }
  }
  Mission m;
  m.id = n.has("id") ? static_cast<std::uint16_t>(n.at("id").unsigned_int(0xFFFF)) : default_id;
  m.home = origin;
  const double speed = n.positive_or("speed", 2.0);
  const Node wps = n.at("waypoints");
  if (wps.size() == 0) wps.fail("mission needs at least one waypoint");
  for (std::size_t k = 0; k < wps.size(); ++k) {
    const Node w = wps.index(k);
    Waypoint wp;
    wp.speed = w.positive_or("speed", speed);
    wp.target = parse_geo(w, origin, true);
    m.waypoints.push_back(wp);
  }
  return m;
}

EventAction parse_action(const Node& n) {
  static const std::pair<const char*, EventAction> kActions[] = {
      {"kill", EventAction::Kill},
      {"set_mode", EventAction::SetMode},
      {"velocity", EventAction::Velocity},
      {"sever_link", EventAction::SeverLink},
      {"restore_link", EventAction::RestoreLink},
      {"rc_disconnect", EventAction::RcDisconnect},
      {"rc_connect", EventAction::RcConnect},
      {"set_ch5", EventAction::SetCh5},
      {"set_ch6", EventAction::SetCh6},
      {"power_loss", EventAction::PowerLoss},
      {"power_restore", EventAction::PowerRestore},
      {"hw_manual", EventAction::HwManual},
      {"hw_auto", EventAction::HwAuto},
      {"override_on", EventAction::OverrideOn},
      {"override_off", EventAction::OverrideOff},
      {"start_engine", EventAction::StartEngine},
  };
  const std::string s = n.string();
  for (const auto& [name, action] : kActions) {
    if (s == name) return action;
  }
  n.fail("unknown action '" + s + "'");
}

Polygon parse_polygon(const Node& n, const GeoPoint& origin) {
  Polygon poly;
  for (std::size_t k = 0; k < n.size(); ++k) poly.push_back(parse_local(n.index(k), origin));
  try {
    return normalized_polygon(poly);
  } catch (const std::exception& e) {
    n.fail(e.what());
  }
}

}  // namespace

const VehicleSpec* Scenario::vehicle(std::uint8_t sys_id) const {
  for (const VehicleSpec& v : vehicles) {
    if (v.sys_id == sys_id) return &v;
  }
  return nullptr;
}

Scenario parse_scenario(const json& j, const std::filesystem::path& base_dir, const std::string& source) {
  const Node root(j, "", source);
  root.expect_object({"name", "seed", "duration", "dt", "time_scale", "stop_when_done", "origin", "gcs",
                      "environment", "vehicle_params", "autopilot", "link", "sensors", "survey", "vehicles",
                      "events", "outputs"});
  Scenario s;
  if (root.has("name")) s.name = root.at("name").string();
  if (root.has("seed")) s.seed = root.at("seed").unsigned_int(UINT64_MAX);
  s.duration = root.positive_or("duration", s.duration);
  if (root.has("dt")) s.dt = root.at("dt").number(1e-4, 0.1);
  if (root.has("time_scale")) s.time_scale = root.at("time_scale").number(0.0, 1e6);
  s.stop_when_done = root.boolean_or("stop_when_done", s.stop_when_done);
  {
    const Node o = root.at("origin");
    o.expect_object({"lat", "lon"});
    s.origin = GeoPoint{o.at("lat").number(-90, 90), o.at("lon").number(-180, 180)};
  }
  if (root.has("gcs")) s.gcs_pos = parse_local(root.at("gcs"), s.origin);

  if (root.has("environment")) {
    const Node e = root.at("environment");
    e.expect_object({"current", "wind", "bottom", "grid_file", "max_current"});
    const double max_current = e.positive_or("max_current", 5.0);
    if (e.has("grid_file")) {
      const std::filesystem::path p = base_dir / e.at("grid_file").string();
      try {
        s.env = EnvironmentField::from_grid(load_environment_grid(p), s.origin, max_current);
      } catch (const std::exception& ex) {
        e.at("grid_file").fail(ex.what());
      }
    } else {
      const FlowModel current = e.has("current") ? parse_flow(e.at("current")) : FlowModel{UniformFlow{}};
      const FlowModel wind = e.has("wind") ? parse_flow(e.at("wind")) : FlowModel{UniformFlow{}};
      const auto bottom = e.has("bottom") ? parse_bottom(e.at("bottom")) : std::variant<FlatBottom, RampBottom>{};
      s.env = EnvironmentField(current, wind, bottom, max_current);
    }
  }

  if (root.has("vehicle_params")) {
    const Node p = root.at("vehicle_params");
    p.expect_object({"v_max", "r_min", "delta_max", "tau_v", "fuel_capacity", "rate_idle", "rate_full",
                     "payload_max", "wind_coeff", "steering_servo", "throttle_servo"});
    VehicleParams& vp = s.params;
    vp.v_max = p.positive_or("v_max", vp.v_max);
    vp.r_min = p.positive_or("r_min", vp.r_min);
    vp.delta_max = p.positive_or("delta_max", vp.delta_max);
    vp.tau_v = p.positive_or("tau_v", vp.tau_v);
    vp.fuel_capacity = p.positive_or("fuel_capacity", vp.fuel_capacity);
    vp.rate_idle = p.positive_or("rate_idle", vp.rate_idle);
    vp.rate_full = p.positive_or("rate_full", vp.rate_full);
    vp.payload_max = p.number_or("payload_max", vp.payload_max);
    vp.wind_coeff = p.number_or("wind_coeff", vp.wind_coeff);
    if (p.has("steering_servo")) vp.steering_servo = parse_servo(p.at("steering_servo"));
    if (p.has("throttle_servo")) vp.throttle_servo = parse_servo(p.at("throttle_servo"));
    try {
      vp.validate();
    } catch (const std::exception& e) {
      p.fail(e.what());
    }
  }

  if (root.has("autopilot")) {
    const Node a = root.at("autopilot");
    a.expect_object({"gains", "lookahead", "speed_gain", "rc_timeout", "setpoint_timeout", "kill_below_us"});
    AutopilotConfig& ac = s.autopilot;
    if (a.has("gains")) {
      const Node g = a.at("gains");
      g.expect_object({"p", "i", "d", "i_clamp", "wp_radius"});
      ac.gains.p = g.number_or("p", ac.gains.p);
      ac.gains.i = g.number_or("i", ac.gains.i);
      ac.gains.d = g.number_or("d", ac.gains.d);
      ac.gains.i_clamp = g.number_or("i_clamp", ac.gains.i_clamp);
      ac.gains.wp_radius = g.number_or("wp_radius", ac.gains.wp_radius);
      try {
        ac.gains.validate();
      } catch (const std::exception& e) {
        g.fail(e.what());
      }
    }
    ac.guidance.lookahead = a.positive_or("lookahead", ac.guidance.lookahead);
    if (a.has("speed_gain")) ac.guidance.speed_gain = a.at("speed_gain").number(0.0, 100.0);
    ac.modes.rc_timeout = a.positive_or("rc_timeout", ac.modes.rc_timeout);
    ac.setpoint_timeout = a.positive_or("setpoint_timeout", ac.setpoint_timeout);
    if (a.has("kill_below_us")) ac.modes.kill_below_us = a.at("kill_below_us").number(800, 2200);
  }
  s.autopilot.tick = s.dt;

  if (root.has("link")) {
    const Node l = root.at("link");
    l.expect_object({"max_range", "base_loss", "latency"});
    s.link.max_range = l.positive_or("max_range", s.link.max_range);
    if (l.has("base_loss")) s.link.base_loss = l.at("base_loss").number(0.0, 1.0);
    if (l.has("latency")) s.link.latency = l.at("latency").number(0.0, 60.0);
  }
  s.link.seed = s.seed;

  if (root.has("sensors")) {
    const Node n = root.at("sensors");
    n.expect_object({"depth_noise_sd", "flow_noise_sd", "aeration_onset", "aeration_max_rate", "depth_rate",
                     "flow_rate"});
    if (n.has("depth_noise_sd")) s.sensors.depth_noise_sd = n.at("depth_noise_sd").number(0.0, 100.0);
    if (n.has("flow_noise_sd")) s.sensors.flow_noise_sd = n.at("flow_noise_sd").number(0.0, 100.0);
    if (n.has("aeration_onset")) s.sensors.aeration.onset_speed = n.at("aeration_onset").number(0.0, 100.0);
    if (n.has("aeration_max_rate")) s.sensors.aeration.max_rate = n.at("aeration_max_rate").number(0.0, 1.0);
    s.depth_rate = n.positive_or("depth_rate", s.depth_rate);
    s.flow_rate = n.positive_or("flow_rate", s.flow_rate);
  }
  s.sensors.aeration.v_max = s.params.v_max;

  if (root.has("outputs")) {
    const Node o = root.at("outputs");
    o.expect_object({"depth_grid_cell"});
    s.grid_cell = o.positive_or("depth_grid_cell", s.grid_cell);
  }

  if (root.has("survey")) {
    const Node n = root.at("survey");
    n.expect_object({"polygon", "swath", "transect_heading_deg", "r_min", "speed", "source"});
    SurveySpec sv;
    sv.polygon = parse_polygon(n.at("polygon"), s.origin);
    sv.swath = n.positive_or("swath", sv.swath);
    sv.transect_heading = heading_field(n, "transect_heading_deg", 0.0);
    sv.r_min = n.positive_or("r_min", s.params.r_min);
    sv.speed = n.positive_or("speed", sv.speed);
    if (n.has("source")) sv.source = parse_source(n.at("source"));
    s.survey = sv;
  }

  const Node vs = root.at("vehicles");
  if (vs.size() == 0) vs.fail("at least one vehicle is required");
  for (std::size_t k = 0; k < vs.size(); ++k) {
    const Node v = vs.index(k);
    v.expect_object({"sys_id", "start", "heading_deg", "mission", "rc", "safety", "sensors"});
    VehicleSpec spec;
    spec.sys_id = static_cast<std::uint8_t>(v.has("sys_id") ? v.at("sys_id").unsigned_int(255) : k + 1);
    if (s.vehicle(spec.sys_id)) v.at("sys_id").fail("duplicate sys_id " + std::to_string(spec.sys_id));
    if (v.has("start")) spec.start = parse_local(v.at("start"), s.origin);
    spec.heading = heading_field(v, "heading_deg", 0.0);
    if (v.has("mission")) {
      const Node m = v.at("mission");
      spec.mission = parse_mission(m, s.origin, base_dir, static_cast<std::uint16_t>(spec.sys_id));
      spec.source = m.has("source") ? parse_source(m.at("source")) : MissionSource::Onboard;
      try {
        validate(*spec.mission);
      } catch (const std::exception& e) {
        m.fail(e.what());
      }
    }
    if (v.has("rc")) {
      const Node r = v.at("rc");
      r.expect_object({"ch1", "ch3", "ch5", "ch6", "connected"});
      spec.rc.ch1_us = r.has("ch1") ? r.at("ch1").number(800, 2200) : spec.rc.ch1_us;
      spec.rc.ch3_us = r.has("ch3") ? r.at("ch3").number(800, 2200) : spec.rc.ch3_us;
      spec.rc.ch5_us = r.has("ch5") ? r.at("ch5").number(800, 2200) : spec.rc.ch5_us;
      spec.rc.ch6_us = r.has("ch6") ? r.at("ch6").number(800, 2200) : spec.rc.ch6_us;
      spec.rc_connected = r.boolean_or("connected", true);
    } else if (spec.mission && spec.source == MissionSource::Onboard) {
      spec.rc.ch5_us = s.autopilot.modes.pulse_for(Mode::AutoWpOnboard);
    }
    if (v.has("safety")) {
      const Node sf = v.at("safety");
      sf.expect_object({"hw_manual_switch", "kill_override", "autopilot_powered", "kill_line_high"});
      spec.safety.hw_manual_switch = sf.boolean_or("hw_manual_switch", false);
      spec.safety.kill_override = sf.boolean_or("kill_override", false);
      spec.safety.autopilot_powered = sf.boolean_or("autopilot_powered", true);
      spec.safety.kill_line_high = sf.boolean_or("kill_line_high", true);
    }
    if (v.has("sensors")) {
      const Node sn = v.at("sensors");
      sn.expect_object({"depth", "wind", "current"});
      spec.depth_sensor = sn.boolean_or("depth", true);
      spec.wind_sensor = sn.boolean_or("wind", true);
      spec.current_sensor = sn.boolean_or("current", true);
    }
    s.vehicles.push_back(spec);
  }

  if (root.has("events")) {
    const Node es = root.at("events");
    for (std::size_t k = 0; k < es.size(); ++k) {
      const Node e = es.index(k);
      e.expect_object({"t", "sys_id", "action", "mode", "value", "steering", "speed"});
      ScenarioEvent ev;
      ev.t = e.at("t").number(0.0, 1e9);
      ev.sys_id = static_cast<std::uint8_t>(e.at("sys_id").unsigned_int(255));
      if (!s.vehicle(ev.sys_id)) e.at("sys_id").fail("no vehicle with this sys_id");
      ev.action = parse_action(e.at("action"));
      if (ev.action == EventAction::SetMode) ev.mode = parse_mode(e.at("mode"));
      if (ev.action == EventAction::SetCh5 || ev.action == EventAction::SetCh6) ev.value = e.at("value").number(800, 2200);
      if (ev.action == EventAction::Velocity) {
        ev.value = e.at("steering").number(-1.0, 1.0);
        ev.speed = e.at("speed").number(0.0, 100.0);
      }
      s.events.push_back(ev);
    }
    std::stable_sort(s.events.begin(), s.events.end(),
                     [](const ScenarioEvent& a, const ScenarioEvent& b) { return a.t < b.t; });
  }
  return s;
}

Scenario parse_scenario_text(const std::string& text, const std::filesystem::path& base_dir,
                             const std::string& source) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    std::size_t line = 1;
    std::size_t col = 1;
    for (std::size_t k = 0; k + 1 < e.byte && k < text.size(); ++k) {
      if (text[k] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw ScenarioError(source + ":" + std::to_string(line) + ":" + std::to_string(col) +
                        ": JSON syntax error: " + e.what());
  }
  return parse_scenario(j, base_dir, source);
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ScenarioError("cannot read scenario " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scenario_text(buf.str(), path.parent_path(), path.string());
}

std::vector<std::string> assign_survey_missions(Scenario& scenario) {
  if (!scenario.survey) return {};
  const SurveySpec& sv = *scenario.survey;
  std::vector<VehicleSpec*> free;
  for (VehicleSpec& v : scenario.vehicles) {
    if (!v.mission) free.push_back(&v);
  }
  if (free.empty()) return {};
  SurveyArea area;
  area.boundary = sv.polygon;
  area.swath = sv.swath;
  area.transect_heading = sv.transect_heading;
  std::vector<LocalPoint> entries;
  for (const VehicleSpec* v : free) entries.push_back(v->start);
  const CoveragePlan plan = jetyak::plan(area, static_cast<int>(free.size()), sv.r_min, entries);
  for (std::size_t k = 0; k < free.size() && k < plan.vehicles.size(); ++k) {
    VehicleSpec& v = *free[k];
    v.mission = to_mission(plan.vehicles[k], scenario.origin, v.sys_id, sv.speed);
    v.source = sv.source;
    if (v.source == MissionSource::Onboard) v.rc.ch5_us = scenario.autopilot.modes.pulse_for(Mode::AutoWpOnboard);
  }
  return plan.warnings;
}

}  // namespace jetyak
