#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <thread>

#include "json.hpp"

#include "jetyak/gcs/session.hpp"

namespace httplib {
class Server;
}

namespace jetyak {

struct ServerConfig {
  std::filesystem::path scenario;
  std::string bind = "127.0.0.1";
  int port = 8080;          // 0 picks a free port
  double time_scale = 1.0;  // sim seconds per wall second; 0 = unpaced
  std::filesystem::path out_dir = ".";
};

// Reads {"scenario", "bind", "port", "time_scale", "out_dir"}; relative
// paths resolve against the config file's directory.
ServerConfig load_server_config(const std::filesystem::path& path);
// Applies JETYAK_PORT and JETYAK_TIME_SCALE from `env` (normally the process
// environment). Throws std::invalid_argument on malformed values.
void apply_env_overrides(ServerConfig& config, const std::map<std::string, std::string>& env);
std::map<std::string, std::string> process_env();

// Structured error body: {"error": {"code": ..., "message": ...}}.
nlohmann::ordered_json error_body(const std::string& code, const std::string& message);

// Coverage plan request as served by GET /plan. `polygon` is
// "lat,lon;lat,lon;..." and must repeat its first vertex at the end.
// Returns {status, body}.
std::pair<int, nlohmann::ordered_json> plan_request(const std::map<std::string, std::string>& query,
                                                     const GeoPoint& origin, double default_r_min);

// HTTP JSON API and binary telemetry stream over a running session.
class GcsServer {
 public:
  GcsServer(Session& session, std::string bind, int port);
  ~GcsServer();
  GcsServer(const GcsServer&) = delete;
  GcsServer& operator=(const GcsServer&) = delete;

  // Binds and starts serving on a background thread. Returns false if the
  // address could not be bound.
  bool start();
  void stop();
  int port() const { return port_; }
  // Blocks until stop() is called from another thread or a signal handler.
  void wait();

 private:
  void routes();

  Session& session_;
  std::string bind_;
  int port_;
  std::unique_ptr<httplib::Server> server_;
  std::thread thread_;
};

}  // namespace jetyak
