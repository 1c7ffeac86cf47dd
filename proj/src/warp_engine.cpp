#include "noisewarp/warp_engine.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <string>

#include "noisewarp/error.hpp"
#include "noisewarp/noise_core.hpp"

namespace noisewarp {
namespace {

// Rasterization runs on an integer lattice with kSubBits fractional bits per
// level-k sub-pixel, so edge tests and ties are exact.
constexpr int kSubBits = 8;
constexpr std::int64_t kSubUnit = std::int64_t{1} << kSubBits;
constexpr std::int64_t kHalfUnit = kSubUnit / 2;
constexpr double kCoordLimit = static_cast<double>(std::int64_t{1} << 30);

struct FixedPoint {
  std::int64_t x;
  std::int64_t y;
};

// Same result as std::llround (half away from zero) without the libm call;
// exact because |v| <= 2^30 and v - trunc(v) is representable.
inline std::int64_t round_half_away(double v) noexcept {
  auto t = static_cast<std::int64_t>(v);
  const double d = v - static_cast<double>(t);
  if (d >= 0.5) {
    ++t;
  } else if (d <= -0.5) {
    --t;
  }
  return t;
}

inline FixedPoint to_fixed(const Vec2& v, double scale) noexcept {
  return {round_half_away(std::clamp(v.x * scale, -kCoordLimit, kCoordLimit)),
          round_half_away(std::clamp(v.y * scale, -kCoordLimit, kCoordLimit))};
}

inline std::int64_t floor_div(std::int64_t a, std::int64_t b) noexcept {
  std::int64_t q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

inline std::int64_t ceil_div(std::int64_t a, std::int64_t b) noexcept {
  return -floor_div(-a, b);
}

struct Edge {
  std::int64_t dx, dy, ox, oy;
  bool owns_ties;

  Edge(FixedPoint from, FixedPoint to) noexcept
      : dx(to.x - from.x), dy(to.y - from.y), ox(from.x), oy(from.y),
        owns_ties(dy > 0 || (dy == 0 && dx < 0)) {}

  // Positive inside a positively oriented triangle. Zero means on the edge
  // line; the tie is resolved as if the point were nudged by (-1, -eps),
  // which gives every point of a shared edge to exactly one side.
  bool covers(std::int64_t px, std::int64_t py) const noexcept {
    const std::int64_t e = dx * (py - oy) - dy * (px - ox);
    return e > 0 || (e == 0 && owns_ties);
  }
};

inline void claim(std::int32_t& slot, std::int32_t owner) noexcept {
  std::atomic_ref<std::int32_t> ref(slot);
  std::int32_t current = ref.load(std::memory_order_relaxed);
  while (current < owner &&
         !ref.compare_exchange_weak(current, owner, std::memory_order_relaxed)) {
  }
}

void rasterize_triangle(FixedPoint a, FixedPoint b, FixedPoint c, std::int32_t owner,
                        int data_w, int data_h, std::vector<std::int32_t>& owners) {
  const std::int64_t area2 = (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x);
  if (area2 == 0) return;
  if (area2 < 0) std::swap(b, c);

  const std::int64_t min_x = std::min({a.x, b.x, c.x});
  const std::int64_t max_x = std::max({a.x, b.x, c.x});
  const std::int64_t min_y = std::min({a.y, b.y, c.y});
  const std::int64_t max_y = std::max({a.y, b.y, c.y});

  // Sub-pixel i has its center at i * kSubUnit + kHalfUnit.
  const std::int64_t i0 = std::max<std::int64_t>(0, ceil_div(min_x - kHalfUnit, kSubUnit));
  const std::int64_t i1 = std::min<std::int64_t>(data_w - 1, floor_div(max_x - kHalfUnit, kSubUnit));
  const std::int64_t j0 = std::max<std::int64_t>(0, ceil_div(min_y - kHalfUnit, kSubUnit));
  const std::int64_t j1 = std::min<std::int64_t>(data_h - 1, floor_div(max_y - kHalfUnit, kSubUnit));
  if (i0 > i1 || j0 > j1) return;

  const Edge e0(a, b), e1(b, c), e2(c, a);
  for (std::int64_t j = j0; j <= j1; ++j) {
    const std::int64_t py = j * kSubUnit + kHalfUnit;
    std::int32_t* row = owners.data() + j * data_w;
    for (std::int64_t i = i0; i <= i1; ++i) {
      const std::int64_t px = i * kSubUnit + kHalfUnit;
      if (e0.covers(px, py) && e1.covers(px, py) && e2.covers(px, py)) {
        claim(row[i], owner);
      }
    }
  }
}

void check_same_dims(int w, int h, int ow, int oh, const char* what) {
  if (w != ow || h != oh) {
    throw InvalidArgumentError(std::string(what) + ": dimension mismatch " +
                               std::to_string(w) + "x" + std::to_string(h) + " vs " +
                               std::to_string(ow) + "x" + std::to_string(oh));
  }
}

}  // namespace

void WarpConfig::validate() const {
  if (k < 0 || k > 8) throw InvalidArgumentError("k must be in [0, 8], got " + std::to_string(k));
  if (s < 1) throw InvalidArgumentError("s must be >= 1, got " + std::to_string(s));
}

CoverageBuffer::CoverageBuffer(int width, int height, int level)
    : width_(width), height_(height), level_(level),
      owners_((static_cast<std::size_t>(width) << level) *
                  (static_cast<std::size_t>(height) << level),
              kNoOwner) {}

std::vector<std::int32_t> CoverageBuffer::coverage_counts() const {
  std::vector<std::int32_t> counts(static_cast<std::size_t>(width_) *
                                       static_cast<std::size_t>(height_),
                                   0);
  for (std::int32_t owner : owners_) {
    if (owner != kNoOwner) ++counts[static_cast<std::size_t>(owner)];
  }
  return counts;
}

double WarpResult::undefined_ratio() const noexcept {
  if (undefined_mask.data.empty()) return 0.0;
  std::size_t undefined = 0;
  for (auto v : undefined_mask.data) undefined += v != 0;
  return static_cast<double>(undefined) / static_cast<double>(undefined_mask.data.size());
}

PixelPolygon triangulate_pixel(PixelCoord p, int s) {
  if (s < 1) throw InvalidArgumentError("s must be >= 1");
  PixelPolygon poly;
  poly.owner = p;
  poly.vertices.reserve(static_cast<std::size_t>(4 * s + 1));
  // Vertices are integer lattice points divided by s, so a point shared by
  // neighbouring pixels gets bit-identical coordinates in both.
  const double inv = static_cast<double>(s);
  const long long x0 = static_cast<long long>(p.x) * s;
  const long long y0 = static_cast<long long>(p.y) * s;
  for (int a = 0; a < s; ++a) poly.vertices.push_back({(x0 + a) / inv, y0 / inv});
  for (int a = 0; a < s; ++a) poly.vertices.push_back({(x0 + s) / inv, (y0 + a) / inv});
  for (int a = 0; a < s; ++a) poly.vertices.push_back({(x0 + s - a) / inv, (y0 + s) / inv});
  for (int a = 0; a < s; ++a) poly.vertices.push_back({x0 / inv, (y0 + s - a) / inv});
  poly.vertices.push_back(pixel_center(p));

  const auto n = static_cast<std::uint32_t>(4 * s);
  poly.triangles.reserve(n);
  for (std::uint32_t i = 0; i < n; ++i) poly.triangles.push_back({n, i, (i + 1) % n});
  return poly;
}

PixelPolygon warp_polygon(const PixelPolygon& poly, const FlowField& flow) {
  PixelPolygon out = poly;
  for (Vec2& v : out.vertices) v += sample_flow(flow, v);
  return out;
}

std::vector<PixelPolygon> warp_all_pixels(const FlowField& flow, int s) {
  if (s < 1) throw InvalidArgumentError("s must be >= 1");
  const int w = flow.width();
  const int h = flow.height();
  const double inv = static_cast<double>(s);
  const auto lw = static_cast<std::size_t>(w) * static_cast<std::size_t>(s) + 1;
  const auto lh = static_cast<std::size_t>(h) * static_cast<std::size_t>(s) + 1;
  auto warped = [&](long long lx, long long ly) {
    const Vec2 v{lx / inv, ly / inv};
    return v + sample_flow(flow, v);
  };

  // Contour vertices lie on lattice lines and are shared between
  // neighbours, so each is warped once: rows hold horizontal pixel edges,
  // cols the vertical ones (corners live in rows).
  std::vector<Vec2> rows(static_cast<std::size_t>(h + 1) * lw);
  std::vector<Vec2> cols(static_cast<std::size_t>(w + 1) * lh);
#pragma omp parallel for schedule(static)
  for (int y = 0; y <= h; ++y) {
    for (std::size_t lx = 0; lx < lw; ++lx) {
      rows[static_cast<std::size_t>(y) * lw + lx] =
          warped(static_cast<long long>(lx), static_cast<long long>(y) * s);
    }
  }
  if (s > 1) {
#pragma omp parallel for schedule(static)
    for (int x = 0; x <= w; ++x) {
      for (std::size_t ly = 0; ly < lh; ++ly) {
        if (ly % static_cast<std::size_t>(s) == 0) continue;
        cols[static_cast<std::size_t>(x) * lh + ly] =
            warped(static_cast<long long>(x) * s, static_cast<long long>(ly));
      }
    }
  }
  auto lattice = [&](long long lx, long long ly) -> const Vec2& {
    if (ly % s == 0) return rows[static_cast<std::size_t>(ly / s) * lw + static_cast<std::size_t>(lx)];
    return cols[static_cast<std::size_t>(lx / s) * lh + static_cast<std::size_t>(ly)];
  };

  // The fan is the same for every pixel; only the vertices differ.
  const PixelPolygon proto = triangulate_pixel({0, 0}, s);
  std::vector<PixelPolygon> polys(static_cast<std::size_t>(w) * static_cast<std::size_t>(h));
#pragma omp parallel for schedule(static)
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      // Same vertex order as triangulate_pixel.
      PixelPolygon poly = proto;
      poly.owner = {x, y};
      poly.vertices.back() = pixel_center({x, y});
      const long long x0 = static_cast<long long>(x) * s;
      const long long y0 = static_cast<long long>(y) * s;
      std::size_t i = 0;
      for (int a = 0; a < s; ++a) poly.vertices[i++] = lattice(x0 + a, y0);
      for (int a = 0; a < s; ++a) poly.vertices[i++] = lattice(x0 + s, y0 + a);
      for (int a = 0; a < s; ++a) poly.vertices[i++] = lattice(x0 + s - a, y0 + s);
      for (int a = 0; a < s; ++a) poly.vertices[i++] = lattice(x0, y0 + s - a);
      Vec2& center = poly.vertices[i];
      center += sample_flow(flow, center);
      polys[static_cast<std::size_t>(y) * static_cast<std::size_t>(w) +
            static_cast<std::size_t>(x)] = std::move(poly);
    }
  }
  return polys;
}

CoverageBuffer rasterize_all(const std::vector<PixelPolygon>& polys, int width,
                             int height, int level) {
  if (level < 0) throw InvalidArgumentError("level must be >= 0");
  CoverageBuffer coverage(width, height, level);
  const int data_w = coverage.data_width();
  const int data_h = coverage.data_height();
  const double scale = static_cast<double>(kSubUnit << level);
  auto& owners = coverage.owners();
  const auto n = static_cast<std::int64_t>(polys.size());

  // Overlaps resolve to the largest owner id, i.e. the last polygon in
  // row-major order, independent of processing order.
#pragma omp parallel
  {
    std::vector<FixedPoint> fixed;
#pragma omp for schedule(dynamic, 256)
    for (std::int64_t i = 0; i < n; ++i) {
      const PixelPolygon& poly = polys[static_cast<std::size_t>(i)];
      if (poly.owner.x < 0 || poly.owner.x >= width || poly.owner.y < 0 ||
          poly.owner.y >= height) {
        continue;
      }
      const auto owner = static_cast<std::int32_t>(poly.owner.y * width + poly.owner.x);
      fixed.clear();
      for (const Vec2& v : poly.vertices) fixed.push_back(to_fixed(v, scale));
      for (const auto& tri : poly.triangles) {
        rasterize_triangle(fixed[tri[0]], fixed[tri[1]], fixed[tri[2]], owner, data_w,
                           data_h, owners);
      }
    }
  }
  return coverage;
}

CoverageBuffer build_coverage(const FlowField& flow, int level, int s) {
  return rasterize_all(warp_all_pixels(flow, s), flow.width(), flow.height(), level);
}

WarpResult aggregate(const CoverageBuffer& coverage, const NoiseGrid& fine,
                     const NoiseGrid* coarse) {
  if (fine.level() != coverage.level()) {
    throw InvalidArgumentError("aggregate: coverage level " +
                               std::to_string(coverage.level()) + " vs noise level " +
                               std::to_string(fine.level()));
  }
  check_same_dims(fine.width(), fine.height(), coverage.width(), coverage.height(),
                  "aggregate");
  const int w = coverage.width();
  const int h = coverage.height();
  const int channels = fine.channels();
  const std::size_t pixels = static_cast<std::size_t>(w) * static_cast<std::size_t>(h);
  if (coarse != nullptr && (coarse->level() != 0 || coarse->width() != w ||
                            coarse->height() != h || coarse->channels() != channels)) {
    throw InvalidArgumentError("aggregate: coarse grid must be the level-0 parent of fine");
  }

  std::vector<double> sums(pixels * static_cast<std::size_t>(channels), 0.0);
  std::vector<std::int32_t> counts(pixels, 0);
  // Source block of each pixel's coverage, or -1 once it spans two blocks.
  std::vector<std::int64_t> block(pixels, -2);
  const auto& owners = coverage.owners();
  const auto values = fine.data();
  const int level = coverage.level();
  const auto data_w = static_cast<std::size_t>(coverage.data_width());
  // Serial row-major pass: fixed summation order keeps results bit-stable.
  for (std::size_t i = 0; i < owners.size(); ++i) {
    const std::int32_t owner = owners[i];
    if (owner == CoverageBuffer::kNoOwner) continue;
    const auto o = static_cast<std::size_t>(owner);
    ++counts[o];
    const auto b = static_cast<std::int64_t>(((i / data_w) >> level) * static_cast<std::size_t>(w) +
                                             ((i % data_w) >> level));
    if (block[o] == -2) {
      block[o] = b;
    } else if (block[o] != b) {
      block[o] = -1;
    }
    for (int c = 0; c < channels; ++c) {
      sums[o * static_cast<std::size_t>(channels) + static_cast<std::size_t>(c)] +=
          values[i * static_cast<std::size_t>(channels) + static_cast<std::size_t>(c)];
    }
  }

  WarpResult result;
  result.noise = NoiseGrid(w, h, channels, 0);
  result.undefined_mask = Mask(w, h, 1, 0);
  result.fill_source.assign(pixels, FillSource::kAnchor);
  auto out = result.noise.data();
  for (std::size_t p = 0; p < pixels; ++p) {
    if (counts[p] == 0) {
      result.undefined_mask.data[p] = 1;
      result.fill_source[p] = FillSource::kRandom;
      continue;
    }
    // A coverage set equal to one whole block integrates to the parent value
    // exactly; copying it avoids float rounding in the sum.
    if (coarse != nullptr && block[p] >= 0 && counts[p] == (1 << (2 * level))) {
      const auto src = coarse->data();
      for (int c = 0; c < channels; ++c) {
        out[p * static_cast<std::size_t>(channels) + static_cast<std::size_t>(c)] =
            src[static_cast<std::size_t>(block[p]) * static_cast<std::size_t>(channels) +
                static_cast<std::size_t>(c)];
      }
      continue;
    }
    const double norm = 1.0 / std::sqrt(static_cast<double>(counts[p]));
    for (int c = 0; c < channels; ++c) {
      const std::size_t idx = p * static_cast<std::size_t>(channels) + static_cast<std::size_t>(c);
      out[idx] = static_cast<float>(sums[idx] * norm);
    }
  }
  return result;
}

NoiseGrid upsample_anchor(const NoiseGrid& anchor, const WarpConfig& cfg) {
  cfg.validate();
  if (anchor.level() != 0) throw InvalidArgumentError("anchor noise must be level 0");
  return upsample_to_level(anchor, cfg.k, cfg.key.derive(stream_tag::kAnchorUpsample));
}

WarpResult warp_noise_upsampled(const NoiseGrid& anchor_fine, const AccumulatedMap& acc,
                                const std::optional<PreviousFrame>& prev,
                                const WarpConfig& cfg, std::uint64_t frame_index,
                                const NoiseGrid* anchor) {
  cfg.validate();
  if (anchor_fine.level() != cfg.k) {
    throw InvalidArgumentError("upsampled anchor is level " +
                               std::to_string(anchor_fine.level()) + ", config k is " +
                               std::to_string(cfg.k));
  }
  check_same_dims(anchor_fine.width(), anchor_fine.height(), acc.width(), acc.height(),
                  "warp_noise");

  WarpResult result = aggregate(build_coverage(acc.field(), cfg.k, cfg.s), anchor_fine, anchor);
  const std::size_t pixels = result.fill_source.size();
  const int channels = anchor_fine.channels();
  auto out = result.noise.data();

  const bool any_undefined =
      std::any_of(result.undefined_mask.data.begin(), result.undefined_mask.data.end(),
                  [](std::uint8_t v) { return v != 0; });
  if (!any_undefined) return result;

  if (prev) {
    const NoiseGrid& prev_noise = prev->noise;
    check_same_dims(prev_noise.width(), prev_noise.height(), acc.width(), acc.height(),
                    "warp_noise (previous frame)");
    check_same_dims(prev->step.width(), prev->step.height(), acc.width(), acc.height(),
                    "warp_noise (step flow)");
    if (prev_noise.channels() != channels || prev_noise.level() != 0) {
      throw InvalidArgumentError("previous frame must be level 0 with matching channels");
    }
    const NoiseGrid prev_fine = upsample_to_level(
        prev_noise, cfg.k, cfg.key.derive(stream_tag::kPreviousUpsample, frame_index));
    // Only undefined pixels are redrawn, so only their polygons are warped
    // and they compete for sub-pixels among themselves.
    std::vector<PixelPolygon> holes;
    for (std::size_t p = 0; p < pixels; ++p) {
      if (!result.undefined_mask.data[p]) continue;
      const PixelCoord q{static_cast<int>(p % static_cast<std::size_t>(acc.width())),
                         static_cast<int>(p / static_cast<std::size_t>(acc.width()))};
      holes.push_back(warp_polygon(triangulate_pixel(q, cfg.s), prev->step));
    }
    const WarpResult second = aggregate(
        rasterize_all(holes, acc.width(), acc.height(), cfg.k), prev_fine, &prev_noise);
    const auto second_data = second.noise.data();
    for (std::size_t p = 0; p < pixels; ++p) {
      if (!result.undefined_mask.data[p] || second.undefined_mask.data[p]) continue;
      for (int c = 0; c < channels; ++c) {
        const std::size_t idx = p * static_cast<std::size_t>(channels) + static_cast<std::size_t>(c);
        out[idx] = second_data[idx];
      }
      result.fill_source[p] = FillSource::kPrevious;
    }
  }

  const RngKey fill_key = cfg.key.derive(stream_tag::kRandomFill, frame_index);
  for (std::size_t p = 0; p < pixels; ++p) {
    if (result.fill_source[p] != FillSource::kRandom) continue;
    for (int c = 0; c < channels; ++c) {
      const std::size_t idx = p * static_cast<std::size_t>(channels) + static_cast<std::size_t>(c);
      out[idx] = static_cast<float>(standard_normal_at(fill_key, idx));
    }
  }
  return result;
}

WarpResult warp_noise(const NoiseGrid& anchor, const AccumulatedMap& acc,
                      const std::optional<PreviousFrame>& prev, const WarpConfig& cfg,
                      std::uint64_t frame_index) {
  check_same_dims(anchor.width(), anchor.height(), acc.width(), acc.height(), "warp_noise");
  return warp_noise_upsampled(upsample_anchor(anchor, cfg), acc, prev, cfg, frame_index, &anchor);
}

std::vector<WarpResult> warp_sequence(const NoiseGrid& g0, const std::vector<FlowField>& flows,
                                      const WarpConfig& cfg) {
  if (flows.empty()) throw InvalidArgumentError("warp_sequence needs at least one flow");
  for (const FlowField& f : flows) {
    check_same_dims(g0.width(), g0.height(), f.width(), f.height(), "warp_sequence");
  }
  const NoiseGrid anchor_fine = upsample_anchor(g0, cfg);

  std::vector<WarpResult> results;
  results.reserve(flows.size() + 1);
  WarpResult first;
  first.noise = g0;
  first.undefined_mask = Mask(g0.width(), g0.height(), 1, 0);
  first.fill_source.assign(static_cast<std::size_t>(g0.width()) *
                               static_cast<std::size_t>(g0.height()),
                           FillSource::kAnchor);
  results.push_back(std::move(first));

  AccumulatedMap acc = AccumulatedMap::zero(g0.width(), g0.height());
  for (std::size_t n = 0; n < flows.size(); ++n) {
    acc = compose(flows[n], acc);
    results.push_back(warp_noise_upsampled(anchor_fine, acc,
                                           PreviousFrame{results.back().noise, flows[n]},
                                           cfg, n + 1, &g0));
  }
  return results;
}

}  // namespace noisewarp
