#pragma once

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <map>
#include <mutex>
#include <optional>
#include <span>
#include <vector>

namespace jetyak {

// Streaming-channel chunk: 4-byte little-endian length, then one wire frame.
std::vector<std::uint8_t> stream_chunk(std::span<const std::uint8_t> frame);

// Fans telemetry frames out to independent subscribers. Each subscriber has
// a bounded queue; when it overflows the oldest chunks are dropped for that
// subscriber only.
class StreamHub {
 public:
  explicit StreamHub(std::size_t max_queue = 4096) : max_queue_(max_queue) {}

  int subscribe();
  void unsubscribe(int id);
  void publish(std::span<const std::uint8_t> frame);
  // Waits up to `timeout` for the next chunk (length prefix included).
  std::optional<std::vector<std::uint8_t>> pop(int id, std::chrono::milliseconds timeout);
  // Wakes every waiting subscriber; pop returns nullopt afterwards.
  void close();

  std::size_t subscribers() const;
  std::size_t published() const;

 private:
  struct Queue {
    std::deque<std::vector<std::uint8_t>> chunks;
    std::size_t dropped = 0;
  };

  mutable std::mutex mutex_;
  std::condition_variable cv_;
  std::map<int, Queue> queues_;
  int next_id_ = 1;
  std::size_t max_queue_;
  std::size_t published_ = 0;
  bool closed_ = false;
};

}  // namespace jetyak
