#include "noisewarp/noise_core.hpp"

#include <cstdint>
#include <string>
#include <vector>

#include "noisewarp/error.hpp"

namespace noisewarp {

int exact_log2(long long value) noexcept {
  if (value < 1 || (value & (value - 1)) != 0) return -1;
  int log = 0;
  while ((1LL << log) < value) ++log;
  return log;
}

NoiseGrid sample_noise(int width, int height, int channels, const RngKey& key) {
  NoiseGrid grid(width, height, channels, 0);
  auto data = grid.data();
  const auto n = static_cast<std::int64_t>(data.size());
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < n; ++i) {
    data[static_cast<std::size_t>(i)] =
        static_cast<float>(standard_normal_at(key, static_cast<std::uint64_t>(i)));
  }
  return grid;
}

NoiseGrid upsample_conditional(const NoiseGrid& grid, int factor, const RngKey& key) {
  const int j = exact_log2(factor);
  if (j < 1) {
    throw InvalidArgumentError("upsample factor must be a power of two >= 2, got " +
                               std::to_string(factor));
  }
  NoiseGrid out(grid.width(), grid.height(), grid.channels(), grid.level() + j);
  const int in_w = grid.data_width();
  const int in_h = grid.data_height();
  const int channels = grid.channels();
  const double inv_factor = 1.0 / factor;
  const double inv_count = 1.0 / (static_cast<double>(factor) * factor);
  auto out_data = out.data();

#pragma omp parallel
  {
    std::vector<double> z(static_cast<std::size_t>(factor) * factor);
#pragma omp for schedule(static)
    for (int y = 0; y < in_h; ++y) {
      for (int x = 0; x < in_w; ++x) {
        for (int c = 0; c < channels; ++c) {
          double sum = 0.0;
          for (int by = 0; by < factor; ++by) {
            for (int bx = 0; bx < factor; ++bx) {
              const std::size_t idx = out.index(x * factor + bx, y * factor + by, c);
              const double v = standard_normal_at(key, idx);
              z[static_cast<std::size_t>(by * factor + bx)] = v;
              sum += v;
            }
          }
          const double mean = sum * inv_count;
          const double base = static_cast<double>(grid.at(x, y, c)) * inv_factor;
          for (int by = 0; by < factor; ++by) {
            for (int bx = 0; bx < factor; ++bx) {
              out_data[out.index(x * factor + bx, y * factor + by, c)] =
                  static_cast<float>(base + (z[static_cast<std::size_t>(by * factor + bx)] - mean));
            }
          }
        }
      }
    }
  }
  return out;
}

NoiseGrid upsample_to_level(const NoiseGrid& grid, int level, const RngKey& key) {
  if (level < grid.level()) {
    throw InvalidArgumentError("cannot upsample level " + std::to_string(grid.level()) +
                               " to lower level " + std::to_string(level));
  }
  if (level == grid.level()) return grid;
  return upsample_conditional(grid, 1 << (level - grid.level()), key);
}

NoiseGrid downsample(const NoiseGrid& grid, int factor) {
  const int j = exact_log2(factor);
  if (j < 0) {
    throw InvalidArgumentError("downsample factor must be a power of two, got " +
                               std::to_string(factor));
  }
  if (j == 0) return grid;

  int out_w = 0, out_h = 0, out_level = 0;
  if (j <= grid.level()) {
    out_w = grid.width();
    out_h = grid.height();
    out_level = grid.level() - j;
  } else {
    if (grid.data_width() % factor != 0 || grid.data_height() % factor != 0) {
      throw InvalidArgumentError("grid of " + std::to_string(grid.data_width()) + "x" +
                                 std::to_string(grid.data_height()) +
                                 " is not divisible by " + std::to_string(factor));
    }
    out_w = grid.data_width() / factor;
    out_h = grid.data_height() / factor;
  }

  NoiseGrid out(out_w, out_h, grid.channels(), out_level);
  const int channels = grid.channels();
  const int dw = out.data_width();
  const int dh = out.data_height();
  auto out_data = out.data();
#pragma omp parallel for schedule(static)
  for (int y = 0; y < dh; ++y) {
    for (int x = 0; x < dw; ++x) {
      for (int c = 0; c < channels; ++c) {
        double sum = 0.0;
        for (int by = 0; by < factor; ++by) {
          for (int bx = 0; bx < factor; ++bx) {
            sum += grid.at(x * factor + bx, y * factor + by, c);
          }
        }
        out_data[out.index(x, y, c)] = static_cast<float>(sum / factor);
      }
    }
  }
  return out;
}

}  // namespace noisewarp
