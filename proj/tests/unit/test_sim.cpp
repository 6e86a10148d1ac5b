#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"

#include "jetyak/autopilot/modes.hpp"
#include "jetyak/gcs/session.hpp"
#include "jetyak/sim/event_log.hpp"
#include "jetyak/sim/metrics.hpp"
#include "jetyak/sim/scenario.hpp"

using namespace jetyak;

namespace {

const std::filesystem::path kScenarios = JETYAK_SCENARIO_DIR;

const char* kMinimal = R"({
  "name": "t",
  "origin": {"lat": 42.0, "lon": -71.0},
  "vehicles": [{"sys_id": 1, "start": {"east": 0, "north": 0}}]
})";

std::string scenario_error(const std::string& text) {
  try {
    parse_scenario_text(text, {}, "s.json");
  } catch (const ScenarioError& e) {
    return e.what();
  }
  return "";
}

bool contains(const std::string& haystack, const std::string& needle) {
  return haystack.find(needle) != std::string::npos;
}

// Runs a scenario for at most `duration` seconds and returns the raw log.
std::string run_log(Scenario s, double duration) {
  s.duration = duration;
  assign_survey_missions(s);
  std::ostringstream log;
  {
    Session session(std::move(s), &log);
    session.run();
    session.finish();
  }
  return log.str();
}

}  // namespace

TEST_SUITE("sim") {

TEST_CASE("minimal scenario parses with defaults") {
  const Scenario s = parse_scenario_text(kMinimal);
  CHECK(s.name == "t");
  CHECK(s.vehicles.size() == 1);
  CHECK(s.dt == 0.05);
  CHECK_FALSE(s.survey.has_value());
}

TEST_CASE("scenario schema errors name the offending location") {
  CHECK(contains(scenario_error(R"({"origin": {"lat": 1, "lon": 1}, "vehicles": [], "colour": 1})"),
                 "colour: unknown field"));
  CHECK(contains(scenario_error(R"({"origin": {"lat": 1, "lon": 1},
      "vehicles": [{"sys_id": 1, "start": {"east": "ten", "north": 0}}]})"),
                 "vehicles[0].start.east: expected a number"));
  CHECK(contains(scenario_error(R"({"origin": {"lat": 1, "lon": 1},
      "vehicles": [{"sys_id": 2, "start": {"east": 0, "north": 0}},
                   {"sys_id": 2, "start": {"east": 5, "north": 0}}]})"),
                 "duplicate sys_id 2"));
  CHECK(contains(scenario_error(R"({"origin": {"lat": 1, "lon": 1},
      "vehicles": [{"sys_id": 1, "start": {"east": 0, "north": 0}}],
      "events": [{"t": 1, "sys_id": 1, "action": "explode"}]})"),
                 "unknown action 'explode'"));
  CHECK(contains(scenario_error(R"({"origin": {"lat": 1, "lon": 1},
      "vehicles": [{"sys_id": 1, "start": {"east": 0, "north": 0}}],
      "events": [{"t": 1, "sys_id": 9, "action": "kill"}]})"),
                 "events[0].sys_id: no vehicle with this sys_id"));
  CHECK(contains(scenario_error(R"({"origin": {"lat": 1, "lon": 1}, "vehicles": []})"),
                 "at least one vehicle"));
  CHECK(contains(scenario_error(R"({"origin": {"lat": 1, "lon": 1}})"), "vehicles: missing required field"));
}

TEST_CASE("scenario syntax errors report line and column") {
  const std::string err = scenario_error("{\n  \"seed\": 1,\n  \"duration\": ,\n}");
  CHECK(contains(err, "s.json:3:"));
}

TEST_CASE("shipped scenarios load and plan") {
  for (const char* name : {"calm_lawnmower.json", "cross_current.json", "fleet4.json", "bench.json"}) {
    CAPTURE(name);
    Scenario s = load_scenario(kScenarios / name);
    assign_survey_missions(s);
    CHECK_FALSE(s.vehicles.empty());
  }
}

TEST_CASE("event log records round trip") {
  std::vector<LogRecord> recs;
  recs.push_back(SessionStartRec{42, 0.05, 42.36, -71.09, "round trip"});
  recs.push_back(VehicleStateRec{1.5, 3, 10.25, -4.5, 1.2, 5.5, 0.1, 5.4, 0.93, 1, 4, 7});
  recs.push_back(FrameSentRec{1.55, 3, LinkDirection::Down, false, {0xA5, 0x00, 0x01, 0x00}});
  recs.push_back(FrameReceivedGcsRec{1.6, 3, {1, 2, 3, 4, 5}});
  recs.push_back(WaypointReachedRec{2.0, 3, 9});
  recs.push_back(MissionActivatedRec{2.1, 3, 77, 5.0, -10.0, -10.0, {0.0, 0.0, 10.0, 150.0}});
  recs.push_back(CommandRec{2.2, 3, "kill"});
  recs.push_back(SessionEndRec{3.0});

  std::stringstream ss;
  {
    EventLogWriter w(ss);
    for (const LogRecord& r : recs) w.write(r);
    CHECK(w.records() == recs.size());
  }
  const EventLogContents c = read_event_log(ss);
  CHECK_FALSE(c.truncated);
  CHECK(c.records == recs);
}

TEST_CASE("truncated event log keeps its complete prefix") {
  std::stringstream ss;
  {
    EventLogWriter w(ss);
    for (int k = 0; k < 10; ++k) w.write(WaypointReachedRec{double(k), 1, std::uint32_t(k)});
  }
  const std::string full = ss.str();
  const std::size_t rec_size = serialize_record(WaypointReachedRec{}).size();
  for (std::size_t cut = 1; cut < rec_size; ++cut) {
    std::istringstream in(full.substr(0, full.size() - cut));
    const EventLogContents c = read_event_log(in);
    CHECK(c.truncated);
    CHECK_FALSE(c.warning.empty());
    CHECK(c.records.size() == 9);
  }
  std::istringstream bad("NOTALOG!" + full.substr(8));
  CHECK_THROWS_AS(read_event_log(bad), std::runtime_error);
}

TEST_CASE("metrics accumulator on a hand-built track") {
  MetricsAccumulator acc;
  // Waypoints (0,0) -> (0,100); the boat runs 1 m east of the line.
  acc.consume(MissionActivatedRec{0.0, 1, 1, 5.0, 0.0, -10.0, {0.0, 0.0, 0.0, 100.0}});
  const auto mode = static_cast<std::uint8_t>(Mode::AutoWpOnboard);
  acc.consume(VehicleStateRec{0.0, 1, 0.0, -10.0, 0.0, 3.0, 0.0, 3.0, 1.0, 1, mode, 0});
  acc.consume(WaypointReachedRec{3.0, 1, 0});
  for (int k = 1; k <= 10; ++k) {
    acc.consume(VehicleStateRec{3.0 + k, 1, 1.0, 10.0 * k - 5.0, 0.0, 3.0, 0.0, 3.0, 1.0 - 0.01 * k, 1, mode, 1});
  }
  acc.consume(FrameSentRec{5.0, 1, LinkDirection::Up, true, {}});
  acc.consume(FrameSentRec{5.0, 1, LinkDirection::Up, false, {}});
  acc.consume(WaypointReachedRec{14.0, 1, 1});
  acc.consume(SessionEndRec{15.0});
  const RunMetrics m = acc.result();
  REQUIRE(m.vehicles.size() == 1);
  const VehicleMetrics& v = m.vehicles[0];
  CHECK(v.xtrack_samples == 10);
  CHECK(v.xtrack_rms() == doctest::Approx(1.0));
  CHECK(v.waypoints_total == 2);
  CHECK(v.waypoints_hit == 2);
  CHECK(v.never_reached == 0);
  CHECK(v.mission_complete);
  CHECK(v.fuel_used() == doctest::Approx(0.1));
  CHECK(m.frames_sent == 2);
  CHECK(m.frames_dropped == 1);
  CHECK(m.duration == 15.0);
  CHECK(m.all_waypoints_hit());
}

TEST_CASE("waypoint passed abeam counts as missed on first pass") {
  MetricsAccumulator acc;
  acc.consume(MissionActivatedRec{0.0, 1, 1, 5.0, 0.0, 0.0, {0.0, 50.0}});
  const auto mode = static_cast<std::uint8_t>(Mode::AutoWpOnboard);
  // Passes 8 m east of the waypoint, beyond it along the leg.
  acc.consume(VehicleStateRec{1.0, 1, 8.0, 55.0, 0.0, 3.0, 0.0, 3.0, 1.0, 1, mode, 0});
  acc.consume(VehicleStateRec{2.0, 1, 8.0, 58.0, 0.0, 3.0, 0.0, 3.0, 1.0, 1, mode, 0});
  const RunMetrics m = acc.result();
  CHECK(m.vehicles[0].missed_first_pass == 1);
  CHECK(m.vehicles[0].never_reached == 1);
  CHECK_FALSE(m.all_waypoints_hit());
}

TEST_CASE("same seed gives a byte-identical log and replay reproduces metrics") {
  const Scenario base = load_scenario(kScenarios / "fleet4.json");
  const std::string a = run_log(base, 90.0);
  const std::string b = run_log(base, 90.0);
  CHECK(a.size() > 1000);
  CHECK(a == b);

  Scenario other = base;
  other.seed += 1;
  other.link.seed += 1;
  CHECK(run_log(other, 90.0) != a);

  Scenario s = load_scenario(kScenarios / "calm_lawnmower.json");
  s.duration = 120.0;
  assign_survey_missions(s);
  std::ostringstream log;
  RunMetrics live;
  {
    Session session(std::move(s), &log);
    session.run();
    session.finish();
    live = session.metrics();
  }
  std::istringstream in(log.str());
  const EventLogContents c = read_event_log(in);
  CHECK_FALSE(c.truncated);
  CHECK(metrics_from_records(c.records) == live);
  CHECK(live.vehicles.at(0).waypoints_hit > 0);
}

}  // TEST_SUITE
