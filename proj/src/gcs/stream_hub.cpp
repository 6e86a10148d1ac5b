#include "jetyak/gcs/stream_hub.hpp"

namespace jetyak {

std::vector<std::uint8_t> stream_chunk(std::span<const std::uint8_t> frame) {
  std::vector<std::uint8_t> out;
  out.reserve(frame.size() + 4);
  const auto n = static_cast<std::uint32_t>(frame.size());
  for (int k = 0; k < 4; ++k) out.push_back(static_cast<std::uint8_t>(n >> (8 * k)));
  out.insert(out.end(), frame.begin(), frame.end());
  return out;
}

int StreamHub::subscribe() {
  std::lock_guard<std::mutex> lock(mutex_);
  const int id = next_id_++;
  queues_[id];
  return id;
}

void StreamHub::unsubscribe(int id) {
  std::lock_guard<std::mutex> lock(mutex_);
  queues_.erase(id);
}

void StreamHub::publish(std::span<const std::uint8_t> frame) {
  const std::vector<std::uint8_t> chunk = stream_chunk(frame);
  {
    std::lock_guard<std::mutex> lock(mutex_);
    ++published_;
    for (auto& [id, q] : queues_) {
      q.chunks.push_back(chunk);
      while (q.chunks.size() > max_queue_) {
        q.chunks.pop_front();
        ++q.dropped;
      }
    }
  }
  cv_.notify_all();
}

std::optional<std::vector<std::uint8_t>> StreamHub::pop(int id, std::chrono::milliseconds timeout) {
  std::unique_lock<std::mutex> lock(mutex_);
  auto ready = [&] {
    auto it = queues_.find(id);
    return closed_ || it == queues_.end() || !it->second.chunks.empty();
  };
  cv_.wait_for(lock, timeout, ready);
  auto it = queues_.find(id);
  if (closed_ || it == queues_.end() || it->second.chunks.empty()) return std::nullopt;
  std::vector<std::uint8_t> chunk = std::move(it->second.chunks.front());
  it->second.chunks.pop_front();
  return chunk;
}

void StreamHub::close() {
  {
    std::lock_guard<std::mutex> lock(mutex_);
    closed_ = true;
  }
  cv_.notify_all();
}

std::size_t StreamHub::subscribers() const {
  std::lock_guard<std::mutex> lock(mutex_);
  return queues_.size();
}

std::size_t StreamHub::published() const {
  std::lock_guard<std::mutex> lock(mutex_);
  return published_;
}

}  // namespace jetyak
