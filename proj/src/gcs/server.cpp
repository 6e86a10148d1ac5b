#include "jetyak/gcs/server.hpp"

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "httplib.h"

#include "jetyak/coverage/mission_io.hpp"

extern char** environ;

namespace jetyak {

namespace {

using ojson = nlohmann::ordered_json;

void reply(httplib::Response& res, int status, const ojson& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void fail(httplib::Response& res, int status, const std::string& code, const std::string& message) {
  reply(res, status, error_body(code, message));
}

std::optional<std::uint8_t> parse_id(const std::string& s) {
  if (s.empty() || s.size() > 3) return std::nullopt;
  int v = 0;
  for (char c : s) {
    if (c < '0' || c > '9') return std::nullopt;
    v = v * 10 + (c - '0');
  }
  if (v > 255) return std::nullopt;
  return static_cast<std::uint8_t>(v);
}

std::optional<double> parse_number(const std::string& s) {
  if (s.empty()) return std::nullopt;
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end != s.c_str() + s.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

const char* leg_name(LegKind k) {
  switch (k) {
    case LegKind::Approach: return "approach";
    case LegKind::Transect: return "transect";
    case LegKind::Turn: return "turn";
    case LegKind::Return: return "return";
  }
  return "?";
}

ojson command_reply(const CommandResult& r) {
  ojson j;
  j["accepted"] = r.accepted;
  if (!r.reason.empty()) j["detail"] = r.reason;
  return j;
}

int status_for(const CommandResult& r) {
  if (r.accepted) return 202;
  if (r.code == "unknown_vehicle") return 404;
  if (r.code == "link_lost") return 409;
  return 400;
}

}  // namespace

ServerConfig load_server_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read config " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw std::invalid_argument(path.string() + ": " + e.what());
  }
  if (!j.is_object()) throw std::invalid_argument(path.string() + ": expected an object");
  ServerConfig c;
  const std::filesystem::path base = path.parent_path();
  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string& k = it.key();
    const auto& v = it.value();
    try {
      if (k == "scenario") {
        c.scenario = base / v.get<std::string>();
      } else if (k == "bind") {
        c.bind = v.get<std::string>();
      } else if (k == "port") {
        c.port = v.get<int>();
      } else if (k == "time_scale") {
        c.time_scale = v.get<double>();
      } else if (k == "out_dir") {
        c.out_dir = base / v.get<std::string>();
      } else {
        throw std::invalid_argument("unknown field");
      }
    } catch (const std::exception& e) {
      throw std::invalid_argument(path.string() + ": " + k + ": " + e.what());
    }
  }
  if (c.port < 0 || c.port > 65535) throw std::invalid_argument(path.string() + ": port out of range");
  if (c.time_scale < 0.0) throw std::invalid_argument(path.string() + ": time_scale must be >= 0");
  return c;
}

void apply_env_overrides(ServerConfig& config, const std::map<std::string, std::string>& env) {
  if (auto it = env.find("JETYAK_PORT"); it != env.end()) {
    const auto v = parse_number(it->second);
    if (!v || *v < 0 || *v > 65535 || *v != std::floor(*v)) {
      throw std::invalid_argument("JETYAK_PORT must be an integer in [0, 65535]");
    }
    config.port = static_cast<int>(*v);
  }
  if (auto it = env.find("JETYAK_TIME_SCALE"); it != env.end()) {
    const auto v = parse_number(it->second);
    if (!v || *v < 0) throw std::invalid_argument("JETYAK_TIME_SCALE must be a number >= 0");
    config.time_scale = *v;
  }
}

std::map<std::string, std::string> process_env() {
  std::map<std::string, std::string> out;
  for (char** e = environ; e && *e; ++e) {
    const std::string kv(*e);
    const auto eq = kv.find('=');
    if (eq != std::string::npos) out.emplace(kv.substr(0, eq), kv.substr(eq + 1));
  }
  return out;
}

nlohmann::ordered_json error_body(const std::string& code, const std::string& message) {
  ojson j;
  j["error"] = {{"code", code}, {"message", message}};
  return j;
}

std::pair<int, nlohmann::ordered_json> plan_request(const std::map<std::string, std::string>& query,
                                                     const GeoPoint& origin, double default_r_min) {
  auto get = [&](const char* key) -> std::optional<std::string> {
    auto it = query.find(key);
    return it == query.end() ? std::nullopt : std::optional<std::string>(it->second);
  };
  const auto poly_text = get("polygon");
  if (!poly_text) return {400, error_body("missing_parameter", "polygon is required (lat,lon;lat,lon;...)")};

  std::vector<GeoPoint> geo;
  std::stringstream ss(*poly_text);
  std::string pair;
  while (std::getline(ss, pair, ';')) {
    const auto comma = pair.find(',');
    const auto lat = comma == std::string::npos ? std::nullopt : parse_number(pair.substr(0, comma));
    const auto lon = comma == std::string::npos ? std::nullopt : parse_number(pair.substr(comma + 1));
    if (!lat || !lon || std::abs(*lat) > 90 || std::abs(*lon) > 180) {
      return {400, error_body("invalid_polygon", "bad vertex '" + pair + "'")};
    }
    geo.push_back(GeoPoint{*lat, *lon});
  }
  if (geo.size() < 4) return {400, error_body("invalid_polygon", "a closed polygon needs at least 4 vertices")};
  if (!(geo.front() == geo.back())) {
    return {400, error_body("polygon_not_closed", "the last vertex must repeat the first")};
  }

  auto number = [&](const char* key, double def, double lo, double hi) -> std::optional<double> {
    const auto s = get(key);
    if (!s) return def;
    const auto v = parse_number(*s);
    if (!v || *v < lo || *v > hi) return std::nullopt;
    return v;
  };
  const auto k = number("k", 1, 1, 64);
  const auto r_min = number("r_min", default_r_min, 1e-3, 1e4);
  const auto swath = number("swath", 10.0, 1e-2, 1e4);
  const auto heading = number("heading_deg", 0.0, -360.0, 360.0);
  const auto speed = number("speed", 3.0, 1e-3, 100.0);
  if (!k || *k != std::floor(*k)) return {400, error_body("invalid_parameter", "k must be an integer in [1, 64]")};
  if (!r_min || !swath || !heading || !speed) {
    return {400, error_body("invalid_parameter", "r_min, swath, heading_deg and speed must be valid numbers")};
  }

  SurveyArea area;
  area.swath = *swath;
  area.transect_heading = deg_to_rad(*heading);
  try {
    for (std::size_t i = 0; i + 1 < geo.size(); ++i) area.boundary.push_back(geo_to_local(origin, geo[i]));
    std::vector<LocalPoint> entries;
    if (const auto e = get("entry")) {
      const auto comma = e->find(',');
      const auto lat = comma == std::string::npos ? std::nullopt : parse_number(e->substr(0, comma));
      const auto lon = comma == std::string::npos ? std::nullopt : parse_number(e->substr(comma + 1));
      if (!lat || !lon) return {400, error_body("invalid_parameter", "entry must be lat,lon")};
      entries.push_back(geo_to_local(origin, GeoPoint{*lat, *lon}));
    } else {
      entries.push_back(area.boundary.front());
    }
    const CoveragePlan plan = jetyak::plan(area, static_cast<int>(*k), *r_min, entries);
    ojson j;
    j["k"] = plan.vehicles.size();
    j["r_min"] = plan.r_min;
    j["swath"] = plan.swath;
    j["coverage_ratio"] = plan.coverage_ratio;
    j["warnings"] = plan.warnings;
    ojson vs = ojson::array();
    for (std::size_t v = 0; v < plan.vehicles.size(); ++v) {
      const VehiclePlan& vp = plan.vehicles[v];
      ojson wps = ojson::array();
      for (const PlannedWaypoint& w : vp.waypoints) {
        const GeoPoint g = local_to_geo(origin, w.pos);
        wps.push_back({{"lat", g.lat}, {"lon", g.lon}, {"leg", leg_name(w.leg)}});
      }
      ojson area_poly = ojson::array();
      for (const LocalPoint& p : vp.area) {
        const GeoPoint g = local_to_geo(origin, p);
        area_poly.push_back({g.lat, g.lon});
      }
      vs.push_back({{"index", v},
                    {"length", vp.length},
                    {"transects", vp.transects.size()},
                    {"area", area_poly},
                    {"mission", mission_to_json(to_mission(vp, origin, static_cast<std::uint16_t>(v + 1), *speed))},
                    {"waypoints", wps}});
    }
    j["vehicles"] = vs;
    return {200, j};
  } catch (const std::domain_error& e) {
    return {400, error_body("out_of_range", e.what())};
  } catch (const std::invalid_argument& e) {
    return {400, error_body("invalid_polygon", e.what())};
  }
}

GcsServer::GcsServer(Session& session, std::string bind, int port)
    : session_(session), bind_(std::move(bind)), port_(port), server_(std::make_unique<httplib::Server>()) {
  routes();
}

GcsServer::~GcsServer() { stop(); }

void GcsServer::routes() {
  httplib::Server& s = *server_;

  s.Get("/fleet", [this](const httplib::Request&, httplib::Response& res) { reply(res, 200, session_.fleet_json()); });

  s.Get(R"(/vehicle/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
    const auto id = parse_id(req.matches[1]);
    if (!id) return fail(res, 400, "bad_vehicle_id", "vehicle id must be an integer in [0, 255]");
    const auto j = session_.vehicle_json(*id);
    if (!j) return fail(res, 404, "unknown_vehicle", "no vehicle with sys_id " + std::to_string(*id));
    reply(res, 200, *j);
  });

  s.Post(R"(/vehicle/([^/]+)/mode)", [this](const httplib::Request& req, httplib::Response& res) {
    const auto id = parse_id(req.matches[1]);
    if (!id) return fail(res, 400, "bad_vehicle_id", "vehicle id must be an integer in [0, 255]");
    nlohmann::json body = nlohmann::json::parse(req.body, nullptr, false);
    if (body.is_discarded() || !body.is_object() || !body.contains("mode") || !body["mode"].is_string()) {
      return fail(res, 400, "bad_request", "expected {\"mode\": \"<MODE>\"}");
    }
    const auto mode = mode_from_string(body["mode"].get<std::string>());
    if (!mode) return fail(res, 400, "invalid_mode", "unknown mode " + body["mode"].get<std::string>());
    const CommandResult r = session_.command(*id, SetModeMsg{*mode});
    if (!r.accepted) return fail(res, status_for(r), r.code, r.reason);
    reply(res, 202, command_reply(r));
  });

  s.Post(R"(/vehicle/([^/]+)/kill)", [this](const httplib::Request& req, httplib::Response& res) {
    const auto id = parse_id(req.matches[1]);
    if (!id) return fail(res, 400, "bad_vehicle_id", "vehicle id must be an integer in [0, 255]");
    const CommandResult r = session_.command(*id, KillMsg{});
    if (!r.accepted) return fail(res, status_for(r), r.code, r.reason);
    reply(res, 202, command_reply(r));
  });

  s.Post(R"(/vehicle/([^/]+)/velocity)", [this](const httplib::Request& req, httplib::Response& res) {
    const auto id = parse_id(req.matches[1]);
    if (!id) return fail(res, 400, "bad_vehicle_id", "vehicle id must be an integer in [0, 255]");
    nlohmann::json body = nlohmann::json::parse(req.body, nullptr, false);
    if (body.is_discarded() || !body.is_object() || !body.contains("steering") || !body.contains("speed") ||
        !body["steering"].is_number() || !body["speed"].is_number()) {
      return fail(res, 400, "bad_request", "expected {\"steering\": number, \"speed\": number}");
    }
    const double steering = body["steering"].get<double>();
    const double speed = body["speed"].get<double>();
    if (!(steering >= -1.0 && steering <= 1.0) || !(speed >= 0.0 && speed <= 100.0)) {
      return fail(res, 400, "invalid_parameter", "steering must be in [-1, 1] and speed in [0, 100]");
    }
    const CommandResult r = session_.command(*id, VelocitySetpointMsg{steering, speed});
    if (!r.accepted) return fail(res, status_for(r), r.code, r.reason);
    reply(res, 202, command_reply(r));
  });

  s.Post(R"(/vehicle/([^/]+)/mission)", [this](const httplib::Request& req, httplib::Response& res) {
    const auto id = parse_id(req.matches[1]);
    if (!id) return fail(res, 400, "bad_vehicle_id", "vehicle id must be an integer in [0, 255]");
    nlohmann::json body = nlohmann::json::parse(req.body, nullptr, false);
    if (body.is_discarded()) return fail(res, 400, "bad_json", "request body is not valid JSON");
    Mission mission;
    try {
      mission = mission_from_json(body);
    } catch (const std::exception& e) {
      return fail(res, 400, "invalid_mission", e.what());
    }
    const bool activate = !req.has_param("activate") || req.get_param_value("activate") != "false";
    const CommandResult r = session_.start_upload(*id, mission, activate);
    if (!r.accepted) return fail(res, status_for(r), r.code, r.reason);
    if (!session_.background_running()) {
      // Headless server: advance the simulation here.
      session_.run_until([&] { return session_.gcs().upload_status(*id).state != UploadState::InProgress; }, 60.0);
    } else {
      const auto deadline = std::chrono::steady_clock::now() + std::chrono::seconds(60);
      while (session_.upload_status(*id).state == UploadState::InProgress &&
             std::chrono::steady_clock::now() < deadline) {
        std::this_thread::sleep_for(std::chrono::milliseconds(10));
      }
    }
    const UploadStatus st = session_.upload_status(*id);
    ojson j;
    j["mission_id"] = st.mission_id;
    j["state"] = std::string(to_string(st.state));
    j["activation_sent"] = st.activation_sent;
    j["elapsed"] = st.finished - st.started;
    if (st.state == UploadState::Accepted) return reply(res, 200, j);
    j["error"] = {{"code", st.state == UploadState::Failed ? "upload_failed" : "upload_timeout"},
                  {"message", "mission was not accepted; the vehicle keeps its previous mission"}};
    reply(res, 502, j);
  });

  s.Post(R"(/vehicle/([^/]+)/preflight)", [this](const httplib::Request& req, httplib::Response& res) {
    const auto id = parse_id(req.matches[1]);
    if (!id) return fail(res, 400, "bad_vehicle_id", "vehicle id must be an integer in [0, 255]");
    if (!session_.vehicle_json(*id)) return fail(res, 404, "unknown_vehicle", "no vehicle with sys_id " + std::to_string(*id));
    reply(res, 200, session_.preflight(*id).to_json());
  });

  s.Get("/plan", [this](const httplib::Request& req, httplib::Response& res) {
    std::map<std::string, std::string> q;
    for (const auto& [k, v] : req.params) q[k] = v;
    const Scenario& sc = session_.sim().scenario();
    const auto [status, body] = plan_request(q, sc.origin, sc.params.r_min);
    reply(res, status, body);
  });

  s.Get("/grids/depth", [this](const httplib::Request& req, httplib::Response& res) {
    double cell = session_.sim().scenario().grid_cell;
    if (req.has_param("cell")) {
      const auto v = parse_number(req.get_param_value("cell"));
      if (!v || *v <= 0.0) return fail(res, 400, "invalid_parameter", "cell must be a positive number");
      cell = *v;
    }
    const DepthGrid g = session_.depth_grid(cell);
    ojson j;
    j["origin"] = {{"lat", g.origin.lat}, {"lon", g.origin.lon}};
    j["cell_size"] = g.cell_size;
    j["rows"] = g.rows();
    j["cols"] = g.cols();
    ojson depth = ojson::array();
    ojson counts = ojson::array();
    for (Eigen::Index r = 0; r < g.rows(); ++r) {
      ojson row = ojson::array();
      ojson crow = ojson::array();
      for (Eigen::Index c = 0; c < g.cols(); ++c) {
        const double d = g.depth(r, c);
        row.push_back(std::isnan(d) ? ojson(nullptr) : ojson(d));
        crow.push_back(g.counts(r, c));
      }
      depth.push_back(row);
      counts.push_back(crow);
    }
    j["depth"] = depth;
    j["counts"] = counts;
    reply(res, 200, j);
  });

  s.Get("/metrics", [this](const httplib::Request&, httplib::Response& res) {
    reply(res, 200, session_.metrics().to_json());
  });

  s.Get("/stream", [this](const httplib::Request&, httplib::Response& res) {
    StreamHub& hub = session_.hub();
    const int sub = hub.subscribe();
    res.set_chunked_content_provider(
        "application/octet-stream",
        [&hub, sub](std::size_t, httplib::DataSink& sink) {
          auto chunk = hub.pop(sub, std::chrono::milliseconds(200));
          if (!sink.is_writable()) return false;
          if (chunk) return sink.write(reinterpret_cast<const char*>(chunk->data()), chunk->size());
          return hub.subscribers() > 0;
        },
        [&hub, sub](bool) { hub.unsubscribe(sub); });
  });

  s.set_error_handler([](const httplib::Request&, httplib::Response& res) {
    if (res.body.empty()) {
      const std::string code = res.status == 404 ? "not_found" : "http_" + std::to_string(res.status);
      res.set_content(error_body(code, "no such endpoint").dump(), "application/json");
    }
  });
  s.set_exception_handler([](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
    std::string what = "internal error";
    try {
      std::rethrow_exception(ep);
    } catch (const std::exception& e) {
      what = e.what();
    } catch (...) {
    }
    res.status = 500;
    res.set_content(error_body("internal", what).dump(), "application/json");
  });
}

bool GcsServer::start() {
  if (port_ == 0) {
    port_ = server_->bind_to_any_port(bind_);
    if (port_ < 0) return false;
  } else if (!server_->bind_to_port(bind_, port_)) {
    return false;
  }
  thread_ = std::thread([this] { server_->listen_after_bind(); });
  server_->wait_until_ready();
  return true;
}

void GcsServer::stop() {
  if (server_) server_->stop();
  session_.hub().close();
  if (thread_.joinable()) thread_.join();
}

void GcsServer::wait() {
  if (thread_.joinable()) thread_.join();
}

}  // namespace jetyak
