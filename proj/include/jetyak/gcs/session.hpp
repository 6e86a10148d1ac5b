#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"

#include "jetyak/gcs/ground_station.hpp"
#include "jetyak/sensors/pipeline.hpp"
#include "jetyak/sim/event_log.hpp"
#include "jetyak/sim/metrics.hpp"
#include "jetyak/sim/simulation.hpp"

namespace jetyak {

enum class ChecklistStage { EngineOff, EngineOn };
std::string_view to_string(ChecklistStage s);

struct ChecklistItem {
  std::string name;
  ChecklistStage stage = ChecklistStage::EngineOff;
  bool passed = false;
  std::string detail;
};

struct ChecklistReport {
  std::uint8_t sys_id = 0;
  std::vector<ChecklistItem> items;

  bool passed() const;
  const ChecklistItem* item(const std::string& name) const;
  nlohmann::ordered_json to_json() const;
};

struct UploadResult {
  UploadState state = UploadState::Idle;
  bool activated = false;
  double elapsed = 0.0;
};

// Simulator plus ground station in one process. Every public member locks
// the session, so API threads and the run loop interleave at tick
// boundaries.
class Session {
 public:
  // `log` receives the binary event log (may be null); `extra` observes
  // every record after the log and metrics.
  Session(Scenario scenario, std::ostream* log = nullptr, RecordSink extra = {});
  ~Session();
  Session(const Session&) = delete;
  Session& operator=(const Session&) = delete;

  void step();
  bool finished() const;
  void finish();
  // Steps until finished (or `max_ticks`); returns ticks executed.
  std::uint64_t run(std::uint64_t max_ticks = UINT64_MAX);
  // Steps until `pred` holds or `timeout` seconds of sim time pass.
  bool run_until(const std::function<bool()>& pred, double timeout);

  // Paced background loop for serve mode: sim time advances at
  // time_scale x wall time (0 = unpaced).
  void start_background(double time_scale);
  void stop_background();
  bool background_running() const { return running_.load(); }

  double now() const;
  RunMetrics metrics() const;

  CommandResult command(std::uint8_t sys_id, const GcsCommand& cmd);
  CommandResult start_upload(std::uint8_t sys_id, const Mission& mission, bool activate);
  UploadStatus upload_status(std::uint8_t sys_id) const;
  // Headless: steps the simulation until the upload resolves.
  UploadResult upload_and_activate(std::uint8_t sys_id, const Mission& mission, double timeout = 60.0);
  // Operator clears a kill: RC ch6 back high, latch cleared, engine restarted.
  void clear_kill(std::uint8_t sys_id);

  // Runs the startup checklist on a stationary vehicle, advancing the
  // simulation while it does.
  ChecklistReport preflight(std::uint8_t sys_id);

  // Snapshot helpers for the API.
  nlohmann::ordered_json fleet_json() const;
  std::optional<nlohmann::ordered_json> vehicle_json(std::uint8_t sys_id) const;
  DepthGrid depth_grid(double cell_size) const;

  // Direct access; callers must hold lock() when other threads are active.
  std::recursive_mutex& mutex() const { return mutex_; }
  Simulation& sim() { return *sim_; }
  const Simulation& sim() const { return *sim_; }
  GroundStation& gcs() { return *gcs_; }
  const GroundStation& gcs() const { return *gcs_; }
  StreamHub& hub() { return gcs_->hub(); }

 private:
  void step_locked();
  bool run_until_locked(const std::function<bool()>& pred, double timeout);
  ChecklistReport preflight_locked(std::uint8_t sys_id);

  mutable std::recursive_mutex mutex_;
  std::unique_ptr<EventLogWriter> writer_;
  MetricsAccumulator metrics_;
  RecordSink extra_;
  std::unique_ptr<Simulation> sim_;
  std::unique_ptr<GroundStation> gcs_;
  std::atomic<bool> running_{false};
  std::atomic<bool> stop_{false};
  std::thread loop_;
};

// Length-prefixed stream chunks of every frame the shore received, rebuilt
// from a session log.
std::vector<std::uint8_t> replay_stream(const std::vector<LogRecord>& records);

}  // namespace jetyak
