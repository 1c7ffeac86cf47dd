#pragma once

#include <optional>
#include <string_view>
#include <vector>

#include "noisewarp/geometry.hpp"

namespace noisewarp {

/// Dense backward displacement field: the vector stored at target pixel
/// center p maps p to its source-frame position p + (dx, dy), in pixels.
class FlowField {
 public:
  FlowField() = default;
  /// Zero field.
  FlowField(int width, int height);
  /// Throws DataError when any component is non-finite.
  FlowField(int width, int height, std::vector<Vec2> data);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }

  const Vec2& at(int x, int y) const noexcept {
    return data_[static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
                 static_cast<std::size_t>(x)];
  }
  Vec2& at(int x, int y) noexcept {
    return data_[static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
                 static_cast<std::size_t>(x)];
  }
  const std::vector<Vec2>& data() const noexcept { return data_; }

  bool same_shape(int w, int h) const noexcept { return width_ == w && height_ == h; }

  friend bool operator==(const FlowField&, const FlowField&) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<Vec2> data_;
};

/// Backward map from frame n directly to frame 0. Same layout as a flow.
class AccumulatedMap {
 public:
  AccumulatedMap() = default;
  explicit AccumulatedMap(FlowField field) : field_(std::move(field)) {}

  static AccumulatedMap zero(int width, int height) {
    return AccumulatedMap(FlowField(width, height));
  }

  const FlowField& field() const noexcept { return field_; }
  int width() const noexcept { return field_.width(); }
  int height() const noexcept { return field_.height(); }

  friend bool operator==(const AccumulatedMap&, const AccumulatedMap&) = default;

 private:
  FlowField field_;
};

/// Catmull-Rom bicubic interpolation of the flow at a continuous point,
/// clamp-to-edge. Points outside [0, width] x [0, height] are clamped into
/// the domain first. Reproduces stored vectors at pixel centers.
Vec2 sample_flow(const FlowField& flow, Vec2 point) noexcept;

/// One backward step followed by the accumulated remainder:
///   out(p) = step(p) + sample_flow(acc, p + step(p)).
AccumulatedMap compose(const FlowField& step, const AccumulatedMap& acc);

/// Accumulates a list of per-frame steps (each n -> n-1); element i of the
/// result maps frame i+1 back to frame 0.
std::vector<AccumulatedMap> accumulate(const std::vector<FlowField>& steps);

enum class FlowKind { kTranslate, kRotate, kSwirl, kZoom };

/// Throws InvalidArgumentError for unknown names.
FlowKind parse_flow_kind(std::string_view name);
std::string_view to_string(FlowKind kind) noexcept;

struct SyntheticFlowParams {
  // translate
  double dx = 0.0;
  double dy = 0.0;
  // rotate: angle in radians; swirl: peak angle at the center
  double angle = 0.0;
  // swirl falloff radius in pixels (angle * exp(-r^2 / radius^2))
  double radius = 32.0;
  // zoom magnification; area change factor is factor^2
  double factor = 1.0;
  // defaults to the image center
  std::optional<Vec2> center;
};

/// Analytic backward flow sampled at pixel centers.
FlowField make_synthetic_flow(FlowKind kind, const SyntheticFlowParams& params,
                              int width, int height);

}  // namespace noisewarp
