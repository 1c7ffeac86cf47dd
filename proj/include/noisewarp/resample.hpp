#pragma once

#include <array>
#include <span>

#include "noisewarp/geometry.hpp"

namespace noisewarp {

enum class InterpScheme { kBilinear, kBicubic, kNearest, kRootBilinear };

/// Catmull-Rom weights for fractional offset t in [0, 1) over taps -1..2.
std::array<double, 4> catmull_rom_weights(double t) noexcept;

/// Samples one channel of an interleaved raster at a continuous position
/// (pixel centers at +0.5) with clamp-to-edge taps.
double sample_raster(std::span<const float> data, int width, int height,
                     int channels, int channel, Vec2 point,
                     InterpScheme scheme) noexcept;

}  // namespace noisewarp
