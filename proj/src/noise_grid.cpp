#include "noisewarp/noise_grid.hpp"

#include <string>

#include "noisewarp/error.hpp"

namespace noisewarp {
namespace {

std::size_t expected_length(int width, int height, int channels, int level) {
  if (width < 1 || height < 1 || channels < 1) {
    throw InvalidArgumentError("grid dimensions must be >= 1, got " +
                               std::to_string(width) + "x" + std::to_string(height) +
                               "x" + std::to_string(channels));
  }
  if (level < 0 || level > 12) {
    throw InvalidArgumentError("grid level out of range: " + std::to_string(level));
  }
  return (static_cast<std::size_t>(height) << level) *
         (static_cast<std::size_t>(width) << level) * static_cast<std::size_t>(channels);
}

}  // namespace

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::kInvalidArgument: return "invalid-argument";
    case ErrorKind::kFormat: return "format-error";
    case ErrorKind::kData: return "data-error";
    case ErrorKind::kIo: return "io-error";
  }
  return "error";
}

NoiseGrid::NoiseGrid(int width, int height, int channels, int level)
    : width_(width), height_(height), channels_(channels), level_(level),
      data_(expected_length(width, height, channels, level), 0.0f) {}

NoiseGrid::NoiseGrid(int width, int height, int channels, int level,
                     std::vector<float> data)
    : width_(width), height_(height), channels_(channels), level_(level),
      data_(std::move(data)) {
  const std::size_t expected = expected_length(width, height, channels, level);
  if (data_.size() != expected) {
    throw InvalidArgumentError("grid data length " + std::to_string(data_.size()) +
                               " does not match shape (expected " +
                               std::to_string(expected) + ")");
  }
}

}  // namespace noisewarp
