#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace noisewarp {

enum class VarianceConvention : std::uint8_t {
  // Every stored value is a standard-normal sample at its own level.
  kUnit = 0,
};

/// A Gaussian noise sample over a width x height base grid, stored at
/// subdivision level k: each base pixel holds 2^k x 2^k sub-pixels.
/// Layout is row-major over the level-k lattice with interleaved channels.
class NoiseGrid {
 public:
  NoiseGrid() = default;
  /// Zero-filled grid.
  NoiseGrid(int width, int height, int channels, int level = 0);
  /// Takes ownership of `data`; its length must equal element_count().
  NoiseGrid(int width, int height, int channels, int level,
            std::vector<float> data);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  int channels() const noexcept { return channels_; }
  int level() const noexcept { return level_; }
  VarianceConvention variance_convention() const noexcept {
    return VarianceConvention::kUnit;
  }

  /// Width/height of the stored lattice: base size times 2^level.
  int data_width() const noexcept { return width_ << level_; }
  int data_height() const noexcept { return height_ << level_; }
  /// Sub-pixels per base pixel edge, 2^level.
  int subdivision() const noexcept { return 1 << level_; }

  std::size_t element_count() const noexcept { return data_.size(); }
  std::size_t pixel_count() const noexcept {
    return static_cast<std::size_t>(data_width()) *
           static_cast<std::size_t>(data_height());
  }

  std::size_t index(int x, int y, int c = 0) const noexcept {
    return (static_cast<std::size_t>(y) * static_cast<std::size_t>(data_width()) +
            static_cast<std::size_t>(x)) *
               static_cast<std::size_t>(channels_) +
           static_cast<std::size_t>(c);
  }

  float at(int x, int y, int c = 0) const noexcept { return data_[index(x, y, c)]; }
  float& at(int x, int y, int c = 0) noexcept { return data_[index(x, y, c)]; }

  std::span<const float> data() const noexcept { return data_; }
  std::span<float> data() noexcept { return data_; }

  bool same_shape(const NoiseGrid& other) const noexcept {
    return width_ == other.width_ && height_ == other.height_ &&
           channels_ == other.channels_ && level_ == other.level_;
  }

  friend bool operator==(const NoiseGrid&, const NoiseGrid&) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  int channels_ = 0;
  int level_ = 0;
  std::vector<float> data_;
};

/// Plain multi-channel raster with interleaved channels (frames, masks).
template <class T>
struct Raster {
  int width = 0;
  int height = 0;
  int channels = 1;
  std::vector<T> data;

  Raster() = default;
  Raster(int w, int h, int c = 1, T fill = T{})
      : width(w), height(h), channels(c),
        data(static_cast<std::size_t>(w) * static_cast<std::size_t>(h) *
                 static_cast<std::size_t>(c),
             fill) {}

  std::size_t index(int x, int y, int c = 0) const noexcept {
    return (static_cast<std::size_t>(y) * static_cast<std::size_t>(width) +
            static_cast<std::size_t>(x)) *
               static_cast<std::size_t>(channels) +
           static_cast<std::size_t>(c);
  }
  const T& at(int x, int y, int c = 0) const noexcept { return data[index(x, y, c)]; }
  T& at(int x, int y, int c = 0) noexcept { return data[index(x, y, c)]; }

  friend bool operator==(const Raster&, const Raster&) = default;
};

using Image = Raster<float>;
using Mask = Raster<std::uint8_t>;

}  // namespace noisewarp
