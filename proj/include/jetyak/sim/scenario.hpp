#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "jetyak/autopilot/autopilot.hpp"
#include "jetyak/coverage/planner.hpp"
#include "jetyak/link/link_model.hpp"
#include "jetyak/sensors/pipeline.hpp"
#include "jetyak/world/environment.hpp"

namespace jetyak {

// Schema violation with the offending location, e.g.
// "scenario.json: vehicles[1].start.east: expected a number".
class ScenarioError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class MissionSource { None, Onboard, Upload };

struct VehicleSpec {
  std::uint8_t sys_id = 1;
  LocalPoint start = LocalPoint::Zero();
  double heading = 0.0;  // rad
  MissionSource source = MissionSource::None;
  std::optional<Mission> mission;
  RcFrame rc;
  bool rc_connected = true;
  SafetyInputs safety;
  bool depth_sensor = true;
  bool wind_sensor = true;
  bool current_sensor = true;
};

enum class EventAction {
  Kill,          // GCS kill command
  SetMode,       // GCS mode command
  Velocity,      // GCS velocity setpoint
  SeverLink,
  RestoreLink,
  RcDisconnect,
  RcConnect,
  SetCh5,
  SetCh6,
  PowerLoss,
  PowerRestore,
  HwManual,
  HwAuto,
  OverrideOn,
  OverrideOff,
  StartEngine,
};

struct ScenarioEvent {
  double t = 0.0;
  std::uint8_t sys_id = 1;
  EventAction action = EventAction::Kill;
  std::optional<Mode> mode;
  double value = 0.0;     // pulse width for SetCh5/SetCh6, steering for Velocity
  double speed = 0.0;     // Velocity
};

struct SurveySpec {
  Polygon polygon;                   // local frame
  double swath = 10.0;
  double transect_heading = 0.0;     // rad
  double r_min = 5.0;
  double speed = 3.0;
  MissionSource source = MissionSource::Onboard;
};

struct Scenario {
  std::string name = "scenario";
  std::uint64_t seed = 1;
  double duration = 600.0;
  double dt = 0.05;
  double time_scale = 0.0;  // 0 runs as fast as possible
  bool stop_when_done = true;
  GeoPoint origin{0.0, 0.0};
  LocalPoint gcs_pos = LocalPoint::Zero();
  EnvironmentField env;
  VehicleParams params;
  AutopilotConfig autopilot;
  LinkModel link;
  SensorConfig sensors;
  double depth_rate = 5.0;      // Hz
  double flow_rate = 1.0;       // Hz
  double telemetry_rate = 5.0;  // Hz
  double heartbeat_rate = 1.0;  // Hz
  double grid_cell = 5.0;       // m, depth grid export
  std::vector<VehicleSpec> vehicles;
  std::optional<SurveySpec> survey;
  std::vector<ScenarioEvent> events;

  const VehicleSpec* vehicle(std::uint8_t sys_id) const;
};

// `base_dir` resolves relative file references (environment grids, mission
// files). `source` names the input in error messages.
Scenario parse_scenario(const nlohmann::json& j, const std::filesystem::path& base_dir = {},
                        const std::string& source = "scenario");
Scenario parse_scenario_text(const std::string& text, const std::filesystem::path& base_dir = {},
                             const std::string& source = "scenario");
Scenario load_scenario(const std::filesystem::path& path);

// Plans the survey (if any) and assigns one coverage mission per vehicle that
// has no explicit mission. Returns planner warnings.
std::vector<std::string> assign_survey_missions(Scenario& scenario);

}  // namespace jetyak
