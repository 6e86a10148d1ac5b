#pragma once

#include <filesystem>
#include <string>

#include "json.hpp"

#include "jetyak/autopilot/mission.hpp"
#include "jetyak/coverage/planner.hpp"

namespace jetyak {

// Mission files are JSON; see docs/file-formats.md.
nlohmann::json mission_to_json(const Mission& mission);
Mission mission_from_json(const nlohmann::json& j);
void save_mission(const std::filesystem::path& path, const Mission& mission);
Mission load_mission(const std::filesystem::path& path);

Mission to_mission(const VehiclePlan& plan, const GeoPoint& origin, std::uint16_t id, double speed);

// Human-readable summary: per-vehicle lengths, waypoint and transect counts,
// coverage ratio.
std::string describe_plan(const CoveragePlan& plan);

}  // namespace jetyak
