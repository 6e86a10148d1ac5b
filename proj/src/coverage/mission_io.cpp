#include "jetyak/coverage/mission_io.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace jetyak {

namespace {

nlohmann::json geo_json(const GeoPoint& g) { return {{"lat", g.lat}, {"lon", g.lon}}; }

GeoPoint geo_from(const nlohmann::json& j, const std::string& where) {
  if (!j.is_object() || !j.contains("lat") || !j.contains("lon") || !j["lat"].is_number() ||
      !j["lon"].is_number()) {
    throw std::invalid_argument(where + ": expected {\"lat\": number, \"lon\": number}");
  }
  try {
    return make_geo(j["lat"].get<double>(), j["lon"].get<double>());
  } catch (const std::exception& e) {
    throw std::invalid_argument(where + ": " + e.what());
  }
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

}  // namespace

nlohmann::json mission_to_json(const Mission& mission) {
  nlohmann::json wps = nlohmann::json::array();
  for (const Waypoint& w : mission.waypoints) {
    wps.push_back({{"lat", w.target.lat}, {"lon", w.target.lon}, {"speed", w.speed}});
  }
  return {{"id", mission.id}, {"home", geo_json(mission.home)}, {"waypoints", wps}};
}

Mission mission_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw std::invalid_argument("mission: expected an object");
  Mission m;
  if (j.contains("id")) {
    if (!j["id"].is_number_unsigned() || j["id"].get<std::uint64_t>() > 0xFFFF) {
      throw std::invalid_argument("mission.id: expected an integer in [0, 65535]");
    }
    m.id = j["id"].get<std::uint16_t>();
  }
  if (!j.contains("home")) throw std::invalid_argument("mission.home: missing");
  m.home = geo_from(j["home"], "mission.home");
  if (!j.contains("waypoints") || !j["waypoints"].is_array()) {
    throw std::invalid_argument("mission.waypoints: expected an array");
  }
  const auto& arr = j["waypoints"];
  for (std::size_t k = 0; k < arr.size(); ++k) {
    const std::string where = "mission.waypoints[" + std::to_string(k) + "]";
    Waypoint w;
    w.target = geo_from(arr[k], where);
    if (arr[k].contains("speed")) {
      if (!arr[k]["speed"].is_number()) throw std::invalid_argument(where + ".speed: expected a number");
      w.speed = arr[k]["speed"].get<double>();
    }
    m.waypoints.push_back(w);
  }
  validate(m);
  return m;
}

void save_mission(const std::filesystem::path& path, const Mission& mission) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << mission_to_json(mission).dump(2) << '\n';
}

Mission load_mission(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw std::invalid_argument(path.string() + ": " + e.what());
  }
  return mission_from_json(j);
}

Mission to_mission(const VehiclePlan& plan, const GeoPoint& origin, std::uint16_t id, double speed) {
  if (plan.waypoints.empty()) throw std::invalid_argument("to_mission: plan has no waypoints");
  Mission m;
  m.id = id;
  m.home = origin;
  for (const PlannedWaypoint& w : plan.waypoints) {
    m.waypoints.push_back({local_to_geo(origin, w.pos), speed});
  }
  validate(m);
  return m;
}

std::string describe_plan(const CoveragePlan& plan) {
  std::ostringstream os;
  os.setf(std::ios::fixed);
  os.precision(1);
  os << "vehicles: " << plan.vehicles.size() << "  swath: " << plan.swath << " m  r_min: " << plan.r_min
     << " m\n";
  for (std::size_t v = 0; v < plan.vehicles.size(); ++v) {
    const VehiclePlan& vp = plan.vehicles[v];
    std::size_t counts[4] = {0, 0, 0, 0};
    for (const PlannedWaypoint& w : vp.waypoints) ++counts[static_cast<int>(w.leg)];
    os << "  vehicle " << v << ": area " << area(vp.area) << " m^2, " << vp.transects.size()
       << " transects, " << vp.waypoints.size() << " waypoints (";
    for (int k = 0; k < 4; ++k) {
      os << (k ? ", " : "") << leg_name(static_cast<LegKind>(k)) << ' ' << counts[k];
    }
    os << "), length " << vp.length << " m\n";
  }
  os.precision(4);
  os << "coverage ratio: " << plan.coverage_ratio << '\n';
  for (const std::string& w : plan.warnings) os << "warning: " << w << '\n';
  return os.str();
}

}  // namespace jetyak
