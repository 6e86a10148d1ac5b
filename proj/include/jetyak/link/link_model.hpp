#pragma once

#include <cstdint>
#include <deque>
#include <mutex>
#include <variant>
#include <vector>

#include "jetyak/common/rng.hpp"

namespace jetyak {

// Long-range radio between the base station and one vehicle. Delivery is a
// hard line-of-sight cliff at max_range plus optional random loss inside it.
struct LinkModel {
  double max_range = 2800.0;  // m
  double base_loss = 0.0;     // drop probability within range
  double latency = 0.05;      // s
  std::uint64_t seed = 0;

  // Throws std::invalid_argument on out-of-range parameters.
  void validate() const;
};

struct Delivered {
  double at;  // simulation time the frame arrives
};
struct Dropped {};

using TransmitOutcome = std::variant<Delivered, Dropped>;

TransmitOutcome transmit(const LinkModel& link, double now, double distance, Rng& rng);

// One direction of a link: a FIFO of frames in flight. Thread-safe; delivery
// order among delivered frames matches send order.
class LinkChannel {
 public:
  explicit LinkChannel(LinkModel model = {}, Rng rng = Rng{});

  // Returns true if the frame will be delivered.
  bool send(std::vector<std::uint8_t> frame, double now, double distance);
  std::vector<std::vector<std::uint8_t>> receive(double now);

  // A severed channel drops everything (e.g. antenna failure).
  void set_severed(bool severed);
  bool severed() const;

  std::size_t sent() const;
  std::size_t dropped() const;
  const LinkModel& model() const { return model_; }

 private:
  struct InFlight {
    double at;
    std::vector<std::uint8_t> bytes;
  };

  LinkModel model_;
  mutable std::mutex mutex_;
  Rng rng_;
  std::deque<InFlight> queue_;
  bool severed_ = false;
  std::size_t sent_ = 0;
  std::size_t dropped_ = 0;
};

}  // namespace jetyak
