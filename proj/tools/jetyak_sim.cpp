#include <atomic>
#include <chrono>
#include <csignal>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>

#include "CLI11.hpp"
#include "json.hpp"

#include "jetyak/autopilot/tuner.hpp"
#include "jetyak/coverage/mission_io.hpp"
#include "jetyak/gcs/server.hpp"
#include "jetyak/gcs/session.hpp"
#include "jetyak/sim/event_log.hpp"
#include "jetyak/sim/metrics.hpp"
#include "jetyak/sim/scenario.hpp"

namespace fs = std::filesystem;
using namespace jetyak;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitInput = 2;
constexpr int kExitMissionFailed = 3;

std::atomic<bool> g_interrupted{false};

void on_signal(int) { g_interrupted = true; }

struct RunOptions {
  fs::path scenario;
  std::optional<double> duration;
  std::optional<std::uint64_t> seed;
  std::optional<double> time_scale;
  bool strict = false;
  fs::path out_dir = "out";
  bool serve = false;
  std::string bind = "127.0.0.1";
  int port = 8080;
};

// Track CSV row from a vehicle state record.
class TrackWriter {
 public:
  TrackWriter(std::ostream& out, GeoPoint origin) : out_(out), origin_(origin) {
    out_ << "t,sys_id,east,north,lat,lon,heading_deg,v_water,vg_east,vg_north,fuel,engine,mode,active_index\n";
    out_ << std::setprecision(10);
  }

  void operator()(const LogRecord& r) {
    const auto* s = std::get_if<VehicleStateRec>(&r);
    if (!s) return;
    const GeoPoint g = local_to_geo(origin_, LocalPoint(s->x, s->y));
    out_ << s->t << ',' << int(s->sys_id) << ',' << s->x << ',' << s->y << ',' << g.lat << ',' << g.lon << ','
         << rad_to_deg(s->psi) << ',' << s->v_water << ',' << s->vg_east << ',' << s->vg_north << ',' << s->fuel
         << ',' << to_string(static_cast<EngineStatus>(s->engine)) << ','
         << to_string(static_cast<Mode>(s->mode)) << ',' << s->active_index << '\n';
  }

 private:
  std::ostream& out_;
  GeoPoint origin_;
};

bool mission_failed(const Scenario& scenario, const RunMetrics& m) {
  for (const VehicleMetrics& v : m.vehicles) {
    const VehicleSpec* spec = scenario.vehicle(v.sys_id);
    if (!spec || !spec->mission) continue;
    if (!v.mission_complete || v.waypoints_hit < v.waypoints_total) return true;
  }
  return false;
}

void print_metrics(const RunMetrics& m) {
  std::printf("duration %.2f s, frames sent %zu, dropped %zu\n", m.duration, m.frames_sent, m.frames_dropped);
  for (const VehicleMetrics& v : m.vehicles) {
    std::printf(
        "  vehicle %u: waypoints %zu/%zu (missed first pass %zu, never reached %zu), xtrack rms %.3f m "
        "max %.3f m, fuel %.4f L, distance %.1f m, %s\n",
        unsigned(v.sys_id), v.waypoints_hit, v.waypoints_total, v.missed_first_pass, v.never_reached,
        v.xtrack_rms(), v.xtrack_max, v.fuel_used(), v.distance, v.mission_complete ? "complete" : "incomplete");
  }
}

void write_json(const fs::path& path, const nlohmann::ordered_json& j) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

int serve_until_done(Session& session, GcsServer& server, double time_scale) {
  std::printf("gcs server listening on port %d\n", server.port());
  std::fflush(stdout);
  session.start_background(time_scale);
  while (!g_interrupted && session.background_running()) {
    std::this_thread::sleep_for(std::chrono::milliseconds(100));
  }
  // The background loop stops at the scenario duration; keep serving the
  // final state until interrupted.
  while (!g_interrupted) std::this_thread::sleep_for(std::chrono::milliseconds(100));
  session.stop_background();
  server.stop();
  return kExitOk;
}

int cmd_run(const RunOptions& o) {
  Scenario scenario = load_scenario(o.scenario);
  if (o.duration) scenario.duration = *o.duration;
  if (o.seed) {
    scenario.seed = *o.seed;
    scenario.link.seed = *o.seed;
  }
  if (o.time_scale) scenario.time_scale = *o.time_scale;

  fs::create_directories(o.out_dir);
  std::ofstream log(o.out_dir / "events.jlog", std::ios::binary);
  std::ofstream track(o.out_dir / "track.csv");
  if (!log || !track) throw std::runtime_error("cannot write to " + o.out_dir.string());
  TrackWriter track_writer(track, scenario.origin);

  const double time_scale = scenario.time_scale;
  Session session(scenario, &log, [&](const LogRecord& r) { track_writer(r); });

  if (o.serve) {
    GcsServer server(session, o.bind, o.port);
    if (!server.start()) {
      std::fprintf(stderr, "error: cannot bind %s:%d\n", o.bind.c_str(), o.port);
      return kExitError;
    }
    serve_until_done(session, server, time_scale > 0.0 ? time_scale : 1.0);
  } else if (time_scale > 0.0) {
    session.start_background(time_scale);
    while (!g_interrupted && session.background_running()) {
      std::this_thread::sleep_for(std::chrono::milliseconds(50));
    }
    session.stop_background();
  } else {
    while (!g_interrupted && !session.finished()) session.step();
  }
  session.finish();
  log.flush();

  const RunMetrics metrics = session.metrics();
  write_json(o.out_dir / "metrics.json", metrics.to_json());
  {
    std::lock_guard lock(session.mutex());
    std::ofstream samples(o.out_dir / "samples.ndjson");
    write_sample_log(samples, session.sim().all_samples());
    std::ofstream grid(o.out_dir / "depth_grid.txt");
    write_environment_grid(grid, session.depth_grid(session.sim().scenario().grid_cell).to_environment_grid());
  }

  std::printf("scenario %s, seed %llu\n", scenario.name.c_str(), static_cast<unsigned long long>(scenario.seed));
  print_metrics(metrics);
  std::printf("artifacts written to %s\n", o.out_dir.string().c_str());
  if (o.strict && mission_failed(scenario, metrics)) {
    std::fprintf(stderr, "mission failed (--strict)\n");
    return kExitMissionFailed;
  }
  return kExitOk;
}

int cmd_replay(const fs::path& log_path, const std::optional<fs::path>& metrics_out,
               const std::optional<fs::path>& stream_out) {
  std::ifstream in(log_path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + log_path.string());
  const EventLogContents contents = read_event_log(in);
  if (contents.truncated) std::fprintf(stderr, "warning: %s\n", contents.warning.c_str());
  const RunMetrics metrics = metrics_from_records(contents.records);
  std::printf("%zu records%s\n", contents.records.size(), contents.truncated ? " (partial replay)" : "");
  print_metrics(metrics);
  if (metrics_out) write_json(*metrics_out, metrics.to_json());
  if (stream_out) {
    const std::vector<std::uint8_t> bytes = replay_stream(contents.records);
    std::ofstream out(*stream_out, std::ios::binary);
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  }
  return kExitOk;
}

int cmd_tune(const fs::path& scenario_path, const fs::path& out) {
  const Scenario scenario = load_scenario(scenario_path);
  TuneConfig config;
  config.dt = scenario.dt;
  config.guidance = scenario.autopilot.guidance;
  const TuneResult r = auto_tune(scenario.params, scenario.autopilot.gains, config);
  for (const std::string& line : r.log) std::printf("  %s\n", line.c_str());
  nlohmann::ordered_json j;
  j["gains"] = {{"p", r.gains.p}, {"i", r.gains.i}, {"d", r.gains.d}, {"i_clamp", r.gains.i_clamp},
                {"wp_radius", r.gains.wp_radius}};
  j["converged"] = r.converged;
  j["iterations"] = r.iterations;
  j["metrics"] = {{"oscillations", r.metrics.oscillations},
                  {"settle_time", r.metrics.settle_time},
                  {"turn_time_ratio", r.metrics.turn_time_ratio},
                  {"chatter_rate", r.metrics.chatter_rate},
                  {"bias", r.metrics.bias},
                  {"corner_overshoot", r.metrics.corner_overshoot},
                  {"corner_cut", r.metrics.corner_cut},
                  {"corner_reached", r.metrics.corner_reached}};
  write_json(out, j);
  std::printf("gains p=%.4g i=%.4g d=%.4g wp_radius=%.3g (%s after %d iterations) -> %s\n", r.gains.p, r.gains.i,
              r.gains.d, r.gains.wp_radius, r.converged ? "converged" : "not converged", r.iterations,
              out.string().c_str());
  return r.converged ? kExitOk : kExitError;
}

// Polygon file: {"origin": {lat, lon}, "polygon": [{lat, lon} | {east, north}, ...],
// "entries": [...]} with optional entries (one per vehicle).
int cmd_plan(const fs::path& polygon_path, int k, double r_min, double swath, double heading_deg, double speed,
             const fs::path& out_dir) {
  std::ifstream in(polygon_path);
  if (!in) throw std::runtime_error("cannot read " + polygon_path.string());
  const nlohmann::json j = nlohmann::json::parse(in);
  auto point = [](const nlohmann::json& p, const GeoPoint& origin) -> LocalPoint {
    if (p.contains("lat")) return geo_to_local(origin, GeoPoint{p.at("lat").get<double>(), p.at("lon").get<double>()});
    return LocalPoint(p.at("east").get<double>(), p.at("north").get<double>());
  };
  const GeoPoint origin{j.at("origin").at("lat").get<double>(), j.at("origin").at("lon").get<double>()};
  Polygon poly;
  for (const auto& p : j.at("polygon")) poly.push_back(point(p, origin));
  SurveyArea area;
  area.boundary = normalized_polygon(poly);
  area.swath = swath;
  area.transect_heading = deg_to_rad(heading_deg);
  std::vector<LocalPoint> entries;
  if (j.contains("entries")) {
    for (const auto& p : j.at("entries")) entries.push_back(point(p, origin));
  }
  if (entries.empty()) entries.push_back(area.boundary.front());

  const CoveragePlan plan = jetyak::plan(area, k, r_min, entries);
  fs::create_directories(out_dir);
  for (std::size_t v = 0; v < plan.vehicles.size(); ++v) {
    const fs::path p = out_dir / ("mission_" + std::to_string(v + 1) + ".json");
    save_mission(p, to_mission(plan.vehicles[v], origin, static_cast<std::uint16_t>(v + 1), speed));
  }
  const std::string summary = describe_plan(plan);
  std::ofstream(out_dir / "plan.txt") << summary;
  std::fputs(summary.c_str(), stdout);
  std::printf("%zu mission files written to %s\n", plan.vehicles.size(), out_dir.string().c_str());
  return kExitOk;
}

int cmd_preflight(const fs::path& scenario_path, int sys_id) {
  Scenario scenario = load_scenario(scenario_path);
  // The checklist runs on the bench: no survey and no missions.
  scenario.stop_when_done = false;
  scenario.survey.reset();
  for (VehicleSpec& v : scenario.vehicles) {
    v.mission.reset();
    v.source = MissionSource::None;
  }
  scenario.events.clear();
  Session session(scenario);
  const ChecklistReport report = session.preflight(static_cast<std::uint8_t>(sys_id));
  for (const ChecklistItem& item : report.items) {
    std::printf("%-4s %-10s %-16s %s\n", item.passed ? "ok" : "FAIL", std::string(to_string(item.stage)).c_str(),
                item.name.c_str(), item.detail.c_str());
  }
  std::printf("preflight %s\n", report.passed() ? "passed" : "failed");
  return report.passed() ? kExitOk : kExitError;
}

int cmd_serve(const fs::path& config_path, const std::optional<int>& port) {
  ServerConfig config = load_server_config(config_path);
  apply_env_overrides(config, process_env());
  if (port) config.port = *port;
  Scenario scenario = load_scenario(config.scenario);
  scenario.stop_when_done = false;
  fs::create_directories(config.out_dir);
  std::ofstream log(config.out_dir / "events.jlog", std::ios::binary);
  Session session(scenario, &log);
  GcsServer server(session, config.bind, config.port);
  if (!server.start()) {
    std::fprintf(stderr, "error: cannot bind %s:%d\n", config.bind.c_str(), config.port);
    return kExitError;
  }
  const int rc = serve_until_done(session, server, config.time_scale);
  session.finish();
  return rc;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Jetyak fleet simulator and ground station"};
  app.require_subcommand(1);

  RunOptions run;
  auto* run_cmd = app.add_subcommand("run", "Run a scenario headless and write artifacts");
  run_cmd->add_option("--scenario", run.scenario, "Scenario file (JSON)")->required()->check(CLI::ExistingFile);
  run_cmd->add_option("--duration", run.duration, "Override the scenario duration, s");
  run_cmd->add_option("--seed", run.seed, "Override the scenario seed");
  run_cmd->add_option("--time-scale", run.time_scale, "Sim seconds per wall second (0 = as fast as possible)");
  run_cmd->add_flag("--strict", run.strict, "Exit with status 3 if any mission is not completed");
  run_cmd->add_option("--out-dir", run.out_dir, "Artifact directory")->capture_default_str();
  run_cmd->add_flag("--serve", run.serve, "Also serve the HTTP API on the running simulation");
  run_cmd->add_option("--bind", run.bind, "Server bind address")->capture_default_str();
  run_cmd->add_option("--port", run.port, "Server port (0 = any free port)")->capture_default_str();

  fs::path replay_log;
  std::optional<fs::path> replay_metrics;
  std::optional<fs::path> replay_stream_out;
  auto* replay_cmd = app.add_subcommand("replay", "Rebuild metrics from an event log");
  replay_cmd->add_option("log", replay_log, "Event log (events.jlog)")->required()->check(CLI::ExistingFile);
  replay_cmd->add_option("--metrics-out", replay_metrics, "Write the reconstructed metrics JSON here");
  replay_cmd->add_option("--stream-out", replay_stream_out, "Write the length-prefixed telemetry stream here");

  fs::path tune_scenario;
  fs::path tune_out = "gains.json";
  auto* tune_cmd = app.add_subcommand("tune", "Auto-tune heading gains for the scenario vehicle");
  tune_cmd->add_option("--scenario", tune_scenario, "Scenario file")->required()->check(CLI::ExistingFile);
  tune_cmd->add_option("--out", tune_out, "Gains file")->capture_default_str();

  fs::path plan_polygon;
  int plan_k = 1;
  double plan_r_min = 5.0;
  double plan_swath = 10.0;
  double plan_heading = 0.0;
  double plan_speed = 3.0;
  fs::path plan_out = "plan";
  auto* plan_cmd = app.add_subcommand("plan", "Plan coverage missions for k vehicles");
  plan_cmd->add_option("--polygon", plan_polygon, "Polygon file (JSON)")->required()->check(CLI::ExistingFile);
  plan_cmd->add_option("--k", plan_k, "Number of vehicles")->check(CLI::Range(1, 64))->capture_default_str();
  plan_cmd->add_option("--r-min", plan_r_min, "Minimum turn radius, m")->check(CLI::PositiveNumber)->capture_default_str();
  plan_cmd->add_option("--swath", plan_swath, "Transect spacing, m")->check(CLI::PositiveNumber)->capture_default_str();
  plan_cmd->add_option("--heading-deg", plan_heading, "Transect heading, degrees from north")->capture_default_str();
  plan_cmd->add_option("--speed", plan_speed, "Waypoint speed, m/s")->check(CLI::PositiveNumber)->capture_default_str();
  plan_cmd->add_option("--out-dir", plan_out, "Mission file directory")->capture_default_str();

  fs::path preflight_scenario;
  int preflight_id = 1;
  auto* preflight_cmd = app.add_subcommand("preflight", "Run the startup checklist on one vehicle");
  preflight_cmd->add_option("--scenario", preflight_scenario, "Scenario file")->required()->check(CLI::ExistingFile);
  preflight_cmd->add_option("--sys-id", preflight_id, "Vehicle id")->check(CLI::Range(0, 255))->capture_default_str();

  fs::path serve_config;
  std::optional<int> serve_port;
  auto* serve_cmd = app.add_subcommand("serve", "Run the GCS server on a paced simulation");
  serve_cmd->add_option("--config", serve_config, "Server config (JSON)")->required()->check(CLI::ExistingFile);
  serve_cmd->add_option("--port", serve_port, "Override the configured port");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitInput;
  }
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);

  try {
    if (*run_cmd) return cmd_run(run);
    if (*replay_cmd) return cmd_replay(replay_log, replay_metrics, replay_stream_out);
    if (*tune_cmd) return cmd_tune(tune_scenario, tune_out);
    if (*plan_cmd) return cmd_plan(plan_polygon, plan_k, plan_r_min, plan_swath, plan_heading, plan_speed, plan_out);
    if (*preflight_cmd) return cmd_preflight(preflight_scenario, preflight_id);
    if (*serve_cmd) return cmd_serve(serve_config, serve_port);
  } catch (const ScenarioError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitInput;
  } catch (const nlohmann::json::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitInput;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitInput;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitError;
  }
  return kExitError;
}
