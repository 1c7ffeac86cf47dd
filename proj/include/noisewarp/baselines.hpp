#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "noisewarp/flow.hpp"
#include "noisewarp/noise_grid.hpp"
#include "noisewarp/resample.hpp"
#include "noisewarp/rng.hpp"

namespace noisewarp {

/// Backward resampling g(p + f(p)) with an interpolation kernel.
NoiseGrid warp_interp(const NoiseGrid& grid, const AccumulatedMap& acc,
                      InterpScheme scheme);

InterpScheme parse_interp_scheme(std::string_view name);
std::string_view to_string(InterpScheme scheme) noexcept;

enum class PriorKind { kRandom, kFixed, kPyocoMixed, kPyocoProgressive, kResidual };

PriorKind parse_prior_kind(std::string_view name);
std::string_view to_string(PriorKind kind) noexcept;

struct PriorSpec {
  PriorKind kind = PriorKind::kRandom;
  double alpha = 1.0;      // PYoCo mixing strength
  double threshold = 0.1;  // residual trigger on [0, 1] frames
  RngKey key;

  void validate() const;
};

struct GridShape {
  int width = 0;
  int height = 0;
  int channels = 1;
};

/// Weights (shared, fresh) = (sqrt(a^2/(1+a^2)), sqrt(1/(1+a^2))).
std::pair<double, double> pyoco_weights(double alpha) noexcept;

/// Non-warping noise priors. kResidual requires `frames` with n_frames
/// entries matching the shape.
std::vector<NoiseGrid> generate_prior(const PriorSpec& spec, int n_frames,
                                      GridShape shape,
                                      std::optional<std::span<const Image>> frames = {});

}  // namespace noisewarp
