#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "noisewarp/flow.hpp"
#include "noisewarp/geometry.hpp"
#include "noisewarp/noise_grid.hpp"
#include "noisewarp/rng.hpp"

namespace noisewarp {

enum class FillPolicy { kTwoStageThenRandom };

struct WarpConfig {
  int k = 3;  // upsample level
  int s = 4;  // contour subdivisions per pixel edge
  FillPolicy fill_policy = FillPolicy::kTwoStageThenRandom;
  RngKey key;

  /// Throws InvalidArgumentError on k < 0 or s < 1.
  void validate() const;
};

/// A pixel's subdivided contour plus its centroid, fan-triangulated.
/// vertices[0, 4s) walk the contour; vertices[4s] is the centroid.
struct PixelPolygon {
  PixelCoord owner;
  std::vector<Vec2> vertices;
  std::vector<std::array<std::uint32_t, 3>> triangles;

  std::size_t contour_size() const noexcept {
    return vertices.empty() ? 0 : vertices.size() - 1;
  }
};

/// Per-sub-pixel owner ids at level k over a width x height base grid.
/// Owner id is the row-major base pixel index, kNoOwner when uncovered.
/// One id per sub-pixel makes the coverage sets disjoint by construction.
class CoverageBuffer {
 public:
  static constexpr std::int32_t kNoOwner = -1;

  CoverageBuffer() = default;
  CoverageBuffer(int width, int height, int level);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  int level() const noexcept { return level_; }
  int data_width() const noexcept { return width_ << level_; }
  int data_height() const noexcept { return height_ << level_; }

  std::int32_t owner(int sx, int sy) const noexcept {
    return owners_[static_cast<std::size_t>(sy) * static_cast<std::size_t>(data_width()) +
                   static_cast<std::size_t>(sx)];
  }
  std::vector<std::int32_t>& owners() noexcept { return owners_; }
  const std::vector<std::int32_t>& owners() const noexcept { return owners_; }

  /// |Omega_p| for every base pixel, row-major.
  std::vector<std::int32_t> coverage_counts() const;

 private:
  int width_ = 0;
  int height_ = 0;
  int level_ = 0;
  std::vector<std::int32_t> owners_;
};

enum class FillSource : std::uint8_t { kAnchor = 0, kPrevious = 1, kRandom = 2 };

struct WarpResult {
  NoiseGrid noise;
  /// 1 where the pixel covered no sub-pixel in the anchor warp.
  Mask undefined_mask;
  std::vector<FillSource> fill_source;

  double undefined_ratio() const noexcept;
};

/// Unit-square contour of pixel p with s segments per edge, walked from the
/// (x, y) corner, plus the centroid; 4s fan triangles.
PixelPolygon triangulate_pixel(PixelCoord p, int s);

/// Moves every vertex v to v + sample_flow(flow, v).
PixelPolygon warp_polygon(const PixelPolygon& poly, const FlowField& flow);

/// Triangulates and warps every pixel of the flow's grid, row-major.
std::vector<PixelPolygon> warp_all_pixels(const FlowField& flow, int s);

/// Assigns each level-k sub-pixel center to the triangle containing it under
/// a top-left tie rule. Later polygons (row-major owner order) overwrite
/// earlier ones. Sub-pixels outside every polygon, and polygon parts outside
/// the grid, stay unowned.
CoverageBuffer rasterize_all(const std::vector<PixelPolygon>& polys, int width,
                             int height, int level);

/// Coverage for a full grid warp: triangulate, warp, rasterize.
CoverageBuffer build_coverage(const FlowField& flow, int level, int s);

/// G(p) = sum_{Omega_p} W_k / sqrt(|Omega_p|). Pixels with empty coverage
/// are zero, flagged undefined, and sourced kRandom pending fill. With the
/// level-0 parent `coarse`, a pixel covering exactly one whole block takes
/// that block's parent value verbatim.
WarpResult aggregate(const CoverageBuffer& coverage, const NoiseGrid& fine,
                     const NoiseGrid* coarse = nullptr);

/// Previous frame for the second fill stage, with the single step flow that
/// maps the current frame back onto it.
struct PreviousFrame {
  const NoiseGrid& noise;
  const FlowField& step;
};

/// Full warp of a level-0 anchor through an accumulated map, followed by the
/// two-stage fill of undefined pixels. `frame_index` selects the per-frame
/// streams used for the fill.
WarpResult warp_noise(const NoiseGrid& anchor, const AccumulatedMap& acc,
                      const std::optional<PreviousFrame>& prev,
                      const WarpConfig& cfg, std::uint64_t frame_index = 1);

/// Same as warp_noise with the anchor already upsampled to level cfg.k.
/// `anchor` is the level-0 parent of anchor_fine, if known.
WarpResult warp_noise_upsampled(const NoiseGrid& anchor_fine,
                                const AccumulatedMap& acc,
                                const std::optional<PreviousFrame>& prev,
                                const WarpConfig& cfg, std::uint64_t frame_index,
                                const NoiseGrid* anchor = nullptr);

/// The anchor's level-k representation used by warp_noise for this config.
NoiseGrid upsample_anchor(const NoiseGrid& anchor, const WarpConfig& cfg);

/// Warps g0 through a sequence of per-frame backward flows (each n -> n-1).
/// Result[0] is g0; result[n] is warped from the anchor through the
/// accumulated map, with result[n-1] as the stage-2 fill source.
std::vector<WarpResult> warp_sequence(const NoiseGrid& g0,
                                      const std::vector<FlowField>& flows,
                                      const WarpConfig& cfg);

}  // namespace noisewarp
