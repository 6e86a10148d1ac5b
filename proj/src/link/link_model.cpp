#include "jetyak/link/link_model.hpp"

#include <cmath>
#include <stdexcept>

namespace jetyak {

void LinkModel::validate() const {
  if (!(max_range >= 0.0)) throw std::invalid_argument("link max_range must be >= 0");
  if (!(base_loss >= 0.0 && base_loss <= 1.0)) {
    throw std::invalid_argument("link base_loss must be in [0, 1]");
  }
  if (!(latency >= 0.0)) throw std::invalid_argument("link latency must be >= 0");
}

TransmitOutcome transmit(const LinkModel& link, double now, double distance, Rng& rng) {
  if (!(distance >= 0.0)) throw std::invalid_argument("transmit: distance must be >= 0");
  // Always draw so the random stream does not depend on geometry.
  const double draw = rng.uniform();
  if (distance > link.max_range) return Dropped{};
  if (draw < link.base_loss) return Dropped{};
  return Delivered{now + link.latency};
}

LinkChannel::LinkChannel(LinkModel model, Rng rng) : model_(model), rng_(std::move(rng)) {
  model_.validate();
}

bool LinkChannel::send(std::vector<std::uint8_t> frame, double now, double distance) {
  std::lock_guard<std::mutex> lock(mutex_);
  ++sent_;
  const TransmitOutcome outcome = transmit(model_, now, distance, rng_);
  if (severed_ || std::holds_alternative<Dropped>(outcome)) {
    ++dropped_;
    return false;
  }
  queue_.push_back({std::get<Delivered>(outcome).at, std::move(frame)});
  return true;
}

std::vector<std::vector<std::uint8_t>> LinkChannel::receive(double now) {
  std::lock_guard<std::mutex> lock(mutex_);
  std::vector<std::vector<std::uint8_t>> out;
  // Constant latency keeps the queue sorted by arrival time.
  while (!queue_.empty() && queue_.front().at <= now + 1e-9) {
    out.push_back(std::move(queue_.front().bytes));
    queue_.pop_front();
  }
  return out;
}

void LinkChannel::set_severed(bool severed) {
  std::lock_guard<std::mutex> lock(mutex_);
  severed_ = severed;
}

bool LinkChannel::severed() const {
  std::lock_guard<std::mutex> lock(mutex_);
  return severed_;
}

std::size_t LinkChannel::sent() const {
  std::lock_guard<std::mutex> lock(mutex_);
  return sent_;
}

std::size_t LinkChannel::dropped() const {
  std::lock_guard<std::mutex> lock(mutex_);
  return dropped_;
}

}  // namespace jetyak
