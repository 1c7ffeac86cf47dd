#include "noisewarp/resample.hpp"

#include <algorithm>
#include <cmath>

namespace noisewarp {

std::array<double, 4> catmull_rom_weights(double t) noexcept {
  const double t2 = t * t;
  const double t3 = t2 * t;
  return {0.5 * (-t3 + 2.0 * t2 - t), 0.5 * (3.0 * t3 - 5.0 * t2 + 2.0),
          0.5 * (-3.0 * t3 + 4.0 * t2 + t), 0.5 * (t3 - t2)};
}

double sample_raster(std::span<const float> data, int width, int height,
                     int channels, int channel, Vec2 point,
                     InterpScheme scheme) noexcept {
  auto tap = [&](int x, int y) -> double {
    x = std::clamp(x, 0, width - 1);
    y = std::clamp(y, 0, height - 1);
    return data[(static_cast<std::size_t>(y) * static_cast<std::size_t>(width) +
                 static_cast<std::size_t>(x)) *
                    static_cast<std::size_t>(channels) +
                static_cast<std::size_t>(channel)];
  };

  if (scheme == InterpScheme::kNearest) {
    const double px = std::clamp(point.x, -1.0, width + 1.0);
    const double py = std::clamp(point.y, -1.0, height + 1.0);
    return tap(static_cast<int>(std::floor(px)), static_cast<int>(std::floor(py)));
  }

  const double u = point.x - 0.5;
  const double v = point.y - 0.5;
  const double fu = std::floor(u);
  const double fv = std::floor(v);
  const double tx = u - fu;
  const double ty = v - fv;
  const int ix = static_cast<int>(std::clamp(fu, -2.0 * width - 4.0, 2.0 * width + 4.0));
  const int iy = static_cast<int>(std::clamp(fv, -2.0 * height - 4.0, 2.0 * height + 4.0));

  if (scheme == InterpScheme::kBicubic) {
    const auto wx = catmull_rom_weights(tx);
    const auto wy = catmull_rom_weights(ty);
    double sum = 0.0;
    for (int r = 0; r < 4; ++r) {
      double row = 0.0;
      for (int c = 0; c < 4; ++c) row += wx[c] * tap(ix - 1 + c, iy - 1 + r);
      sum += wy[r] * row;
    }
    return sum;
  }

  double w00 = (1.0 - tx) * (1.0 - ty);
  double w10 = tx * (1.0 - ty);
  double w01 = (1.0 - tx) * ty;
  double w11 = tx * ty;
  if (scheme == InterpScheme::kRootBilinear) {
    w00 = std::sqrt(w00);
    w10 = std::sqrt(w10);
    w01 = std::sqrt(w01);
    w11 = std::sqrt(w11);
  }
  return w00 * tap(ix, iy) + w10 * tap(ix + 1, iy) + w01 * tap(ix, iy + 1) +
         w11 * tap(ix + 1, iy + 1);
}

}  // namespace noisewarp
