#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <variant>
#include <vector>

#include "jetyak/link/messages.hpp"

namespace jetyak {

inline constexpr std::uint8_t kFrameMagic = 0xA5;
inline constexpr std::size_t kFrameOverhead = 7;  // magic, len, seq, sys, msg, crc(2)

enum class DecodeError : std::uint8_t {
  BadMagic,     // first byte is not 0xA5
  Truncated,    // fewer bytes than the header/length field requires
  BadLength,    // bytes beyond the frame, or payload size wrong for the msg_id
  CrcMismatch,
  UnknownMsg,
  BadPayload,   // enum field out of range
};

std::string_view to_string(DecodeError e);

using DecodeResult = std::variant<Frame, DecodeError>;

// Throws std::length_error if the payload would exceed 255 bytes.
std::vector<std::uint8_t> encode(const Message& message, std::uint8_t seq, std::uint8_t sys_id);
inline std::vector<std::uint8_t> encode(const Frame& f) { return encode(f.message, f.seq, f.sys_id); }

// Decodes exactly one frame occupying the whole span.
DecodeResult decode(std::span<const std::uint8_t> bytes);

// Incremental decoder for a byte stream; skips garbage and resynchronizes on
// the next magic byte that starts a valid frame.
class StreamDecoder {
 public:
  void feed(std::span<const std::uint8_t> bytes);
  std::optional<Frame> next();

  std::size_t frames_decoded() const { return frames_; }
  std::size_t bytes_skipped() const { return skipped_; }
  std::size_t errors() const { return errors_; }
  std::size_t buffered() const { return buffer_.size() - head_; }

 private:
  void compact();

  std::vector<std::uint8_t> buffer_;
  std::size_t head_ = 0;
  std::size_t frames_ = 0;
  std::size_t skipped_ = 0;
  std::size_t errors_ = 0;
};

}  // namespace jetyak
