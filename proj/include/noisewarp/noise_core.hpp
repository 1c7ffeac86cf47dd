#pragma once

#include "noisewarp/noise_grid.hpp"
#include "noisewarp/rng.hpp"

namespace noisewarp {

/// Level-0 grid of i.i.d. standard normals. Element i is
/// standard_normal_at(key, i).
NoiseGrid sample_noise(int width, int height, int channels, const RngKey& key);

/// Conditionally refines every stored value x into an factor x factor block
///   x / factor + (Z - <Z>)
/// with Z i.i.d. standard normal over the block, i.e. a white-noise sample
/// whose block sums reproduce the input. Output level is input level +
/// log2(factor). Throws InvalidArgumentError unless factor is 2^j, j >= 1.
NoiseGrid upsample_conditional(const NoiseGrid& grid, int factor,
                               const RngKey& key);

/// Upsamples to an absolute level; a no-op copy when already there.
NoiseGrid upsample_to_level(const NoiseGrid& grid, int level, const RngKey& key);

/// Aggregates factor x factor blocks as (block sum) / factor, the inverse of
/// upsample_conditional. When factor exceeds 2^level the lattice itself is
/// re-based into a coarser level-0 grid, which requires divisible dimensions.
NoiseGrid downsample(const NoiseGrid& grid, int factor);

/// log2 of a power of two >= 1, or -1.
int exact_log2(long long value) noexcept;

}  // namespace noisewarp
