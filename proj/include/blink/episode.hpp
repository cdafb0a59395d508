#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace blink {

inline constexpr int kEpisodeFormatVersion = 1;

// One time step: NK-centered observation, realized displacement, and the
// cumulative kill count up to and including this frame.
struct Frame {
  std::vector<float> obs;  // C*H*W, channel-major, values in [0,1]
  float dx = 0.0f, dy = 0.0f;
  std::int32_t cum_kills = 0;
};

struct Episode {
  std::string id;
  int channels = 3;
  int height = 0;
  int width = 0;
  std::vector<Frame> frames;

  int length() const { return static_cast<int>(frames.size()); }
  std::size_t obs_size() const {
    return static_cast<std::size_t>(channels) * height * width;
  }
  void validate() const;  // throws on monotonicity/shape violations
};

struct DecodeError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct MalformedHeaderError : DecodeError {
  using DecodeError::DecodeError;
};
struct TruncatedPayloadError : DecodeError {
  using DecodeError::DecodeError;
};
struct VersionMismatchError : DecodeError {
  using DecodeError::DecodeError;
};

// Format: one JSON header line {"id","T","C","H","W","format_version"}
// then float32 LE observations (T*C*H*W, frame-major), float32 LE actions
// (T*2), int32 LE cum_kills (T).
void save_episode(const Episode& ep, const std::string& path);
Episode load_episode(const std::string& path);

std::uint64_t file_fnv1a(const std::string& path);

}  // namespace blink
