#include "noisewarp/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "noisewarp/error.hpp"
#include "noisewarp/noise_core.hpp"

namespace noisewarp {

NoiseGrid warp_interp(const NoiseGrid& grid, const AccumulatedMap& acc, InterpScheme scheme) {
  if (grid.level() != 0) throw InvalidArgumentError("warp_interp expects a level-0 grid");
  if (!acc.field().same_shape(grid.width(), grid.height())) {
    throw InvalidArgumentError("warp_interp: flow and grid dimensions differ");
  }
  const int w = grid.width();
  const int h = grid.height();
  const int channels = grid.channels();
  NoiseGrid out(w, h, channels, 0);
  auto out_data = out.data();
  const auto in = grid.data();
#pragma omp parallel for schedule(static)
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const Vec2 source = pixel_center({x, y}) + acc.field().at(x, y);
      for (int c = 0; c < channels; ++c) {
        out_data[out.index(x, y, c)] =
            static_cast<float>(sample_raster(in, w, h, channels, c, source, scheme));
      }
    }
  }
  return out;
}

InterpScheme parse_interp_scheme(std::string_view name) {
  if (name == "bilinear") return InterpScheme::kBilinear;
  if (name == "bicubic") return InterpScheme::kBicubic;
  if (name == "nearest") return InterpScheme::kNearest;
  if (name == "root_bilinear") return InterpScheme::kRootBilinear;
  throw InvalidArgumentError("unknown interpolation scheme '" + std::string(name) + "'");
}

std::string_view to_string(InterpScheme scheme) noexcept {
  switch (scheme) {
    case InterpScheme::kBilinear: return "bilinear";
    case InterpScheme::kBicubic: return "bicubic";
    case InterpScheme::kNearest: return "nearest";
    case InterpScheme::kRootBilinear: return "root_bilinear";
  }
  return "unknown";
}

PriorKind parse_prior_kind(std::string_view name) {
  if (name == "random") return PriorKind::kRandom;
  if (name == "fixed") return PriorKind::kFixed;
  if (name == "pyoco_mixed") return PriorKind::kPyocoMixed;
  if (name == "pyoco_progressive") return PriorKind::kPyocoProgressive;
  if (name == "residual") return PriorKind::kResidual;
  throw InvalidArgumentError("unknown prior kind '" + std::string(name) + "'");
}

std::string_view to_string(PriorKind kind) noexcept {
  switch (kind) {
    case PriorKind::kRandom: return "random";
    case PriorKind::kFixed: return "fixed";
    case PriorKind::kPyocoMixed: return "pyoco_mixed";
    case PriorKind::kPyocoProgressive: return "pyoco_progressive";
    case PriorKind::kResidual: return "residual";
  }
  return "unknown";
}

void PriorSpec::validate() const {
  if (!std::isfinite(alpha) || alpha < 0.0) {
    throw InvalidArgumentError("prior alpha must be finite and >= 0");
  }
  if (!std::isfinite(threshold) || threshold < 0.0) {
    throw InvalidArgumentError("prior threshold must be finite and >= 0");
  }
}

std::pair<double, double> pyoco_weights(double alpha) noexcept {
  const double a2 = alpha * alpha;
  return {std::sqrt(a2 / (1.0 + a2)), std::sqrt(1.0 / (1.0 + a2))};
}

namespace {

NoiseGrid blend(const NoiseGrid& shared, const NoiseGrid& fresh, double a, double b) {
  NoiseGrid out = fresh;
  auto o = out.data();
  const auto s = shared.data();
  const auto f = fresh.data();
  for (std::size_t i = 0; i < o.size(); ++i) {
    o[i] = static_cast<float>(a * s[i] + b * f[i]);
  }
  return out;
}

}  // namespace

std::vector<NoiseGrid> generate_prior(const PriorSpec& spec, int n_frames, GridShape shape,
                                      std::optional<std::span<const Image>> frames) {
  spec.validate();
  if (n_frames < 1) throw InvalidArgumentError("n_frames must be >= 1");
  auto fresh = [&](int n) {
    return sample_noise(shape.width, shape.height, shape.channels,
                        spec.key.derive(stream_tag::kPrior, static_cast<std::uint64_t>(n)));
  };

  std::vector<NoiseGrid> out;
  out.reserve(static_cast<std::size_t>(n_frames));
  const auto [a, b] = pyoco_weights(spec.alpha);

  switch (spec.kind) {
    case PriorKind::kRandom:
      for (int n = 0; n < n_frames; ++n) out.push_back(fresh(n));
      break;
    case PriorKind::kFixed: {
      const NoiseGrid g = fresh(0);
      out.assign(static_cast<std::size_t>(n_frames), g);
      break;
    }
    case PriorKind::kPyocoMixed: {
      const NoiseGrid shared = sample_noise(shape.width, shape.height, shape.channels,
                                            spec.key.derive(stream_tag::kPriorShared));
      for (int n = 0; n < n_frames; ++n) out.push_back(blend(shared, fresh(n), a, b));
      break;
    }
    case PriorKind::kPyocoProgressive:
      out.push_back(fresh(0));
      for (int n = 1; n < n_frames; ++n) out.push_back(blend(out.back(), fresh(n), a, b));
      break;
    case PriorKind::kResidual: {
      if (!frames) throw InvalidArgumentError("residual prior needs the image frames");
      if (frames->size() != static_cast<std::size_t>(n_frames)) {
        throw InvalidArgumentError("residual prior needs " + std::to_string(n_frames) +
                                   " frames, got " + std::to_string(frames->size()));
      }
      for (const Image& f : *frames) {
        if (f.width != shape.width || f.height != shape.height) {
          throw InvalidArgumentError("residual prior: frame size does not match noise shape");
        }
      }
      out.push_back(fresh(0));
      for (int n = 1; n < n_frames; ++n) {
        const Image& cur = (*frames)[static_cast<std::size_t>(n)];
        const Image& prev = (*frames)[static_cast<std::size_t>(n - 1)];
        NoiseGrid next = fresh(n);
        const NoiseGrid& last = out.back();
        for (int y = 0; y < shape.height; ++y) {
          for (int x = 0; x < shape.width; ++x) {
            double change = 0.0;
            for (int c = 0; c < std::min(cur.channels, prev.channels); ++c) {
              change = std::max(change, std::abs(static_cast<double>(cur.at(x, y, c)) -
                                                 static_cast<double>(prev.at(x, y, c))));
            }
            if (change <= spec.threshold) {
              for (int c = 0; c < shape.channels; ++c) next.at(x, y, c) = last.at(x, y, c);
            }
          }
        }
        out.push_back(std::move(next));
      }
      break;
    }
  }
  return out;
}

}  // namespace noisewarp
