#pragma once

#include <array>
#include <cstdint>

namespace noisewarp {

/// Identifies one reproducible random stream. The value drawn at a given
/// element index depends only on (seed, stream, index).
struct RngKey {
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;

  /// A key for a named sub-stream, e.g. the fill noise of frame 7. Distinct
  /// (tag, index) pairs give unrelated streams.
  RngKey derive(std::uint64_t tag, std::uint64_t index = 0) const noexcept;

  friend bool operator==(const RngKey&, const RngKey&) = default;
};

// Stream tags used across the engine. Stable: changing one changes every
// golden output.
namespace stream_tag {
inline constexpr std::uint64_t kAnchorUpsample = 0x616e63686f72ULL;
inline constexpr std::uint64_t kPreviousUpsample = 0x70726576ULL;
inline constexpr std::uint64_t kRandomFill = 0x66696c6cULL;
inline constexpr std::uint64_t kPrior = 0x7072696f72ULL;
inline constexpr std::uint64_t kPriorShared = 0x736861726564ULL;
inline constexpr std::uint64_t kTrial = 0x747269616cULL;
}  // namespace stream_tag

/// Philox4x32-10 block function (Salmon et al., SC'11).
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key) noexcept;

std::uint64_t splitmix64(std::uint64_t x) noexcept;

/// Two independent uniforms in (0, 1] with 53 bits of resolution, taken from
/// the Philox block at `index`.
std::array<double, 2> uniform_pair_at(const RngKey& key,
                                      std::uint64_t index) noexcept;

/// Standard normal value at `index` (Box-Muller, cosine branch).
double standard_normal_at(const RngKey& key, std::uint64_t index) noexcept;

}  // namespace noisewarp
