#include "noisewarp/flow.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "noisewarp/error.hpp"

namespace noisewarp {
namespace {

// Catmull-Rom in Horner form; returns p1 exactly for constant taps and at t = 0.
inline double catmull_rom(double p0, double p1, double p2, double p3, double t) noexcept {
  return p1 + 0.5 * t *
                  (p2 - p0 +
                   t * (2.0 * p0 - 5.0 * p1 + 4.0 * p2 - p3 +
                        t * (3.0 * (p1 - p2) + p3 - p0)));
}

}  // namespace

FlowField::FlowField(int width, int height)
    : FlowField(width, height,
                std::vector<Vec2>(static_cast<std::size_t>(std::max(width, 0)) *
                                  static_cast<std::size_t>(std::max(height, 0)))) {}

FlowField::FlowField(int width, int height, std::vector<Vec2> data)
    : width_(width), height_(height), data_(std::move(data)) {
  if (width < 1 || height < 1) {
    throw InvalidArgumentError("flow dimensions must be >= 1, got " +
                               std::to_string(width) + "x" + std::to_string(height));
  }
  if (data_.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height)) {
    throw InvalidArgumentError("flow data length does not match " +
                               std::to_string(width) + "x" + std::to_string(height));
  }
  for (const Vec2& v : data_) {
    if (!std::isfinite(v.x) || !std::isfinite(v.y)) {
      throw DataError("flow field contains a non-finite displacement");
    }
  }
}

Vec2 sample_flow(const FlowField& flow, Vec2 point) noexcept {
  const int w = flow.width();
  const int h = flow.height();
  const double px = std::clamp(point.x, 0.0, static_cast<double>(w));
  const double py = std::clamp(point.y, 0.0, static_cast<double>(h));
  const double u = px - 0.5;
  const double v = py - 0.5;
  const double fu = std::floor(u);
  const double fv = std::floor(v);
  const double tx = u - fu;
  const double ty = v - fv;
  const int ix = static_cast<int>(fu);
  const int iy = static_cast<int>(fv);

  double col_x[4];
  double col_y[4];
  for (int r = 0; r < 4; ++r) {
    const int yy = std::clamp(iy - 1 + r, 0, h - 1);
    const Vec2& a = flow.at(std::clamp(ix - 1, 0, w - 1), yy);
    const Vec2& b = flow.at(std::clamp(ix, 0, w - 1), yy);
    const Vec2& c = flow.at(std::clamp(ix + 1, 0, w - 1), yy);
    const Vec2& d = flow.at(std::clamp(ix + 2, 0, w - 1), yy);
    col_x[r] = catmull_rom(a.x, b.x, c.x, d.x, tx);
    col_y[r] = catmull_rom(a.y, b.y, c.y, d.y, tx);
  }
  return {catmull_rom(col_x[0], col_x[1], col_x[2], col_x[3], ty),
          catmull_rom(col_y[0], col_y[1], col_y[2], col_y[3], ty)};
}

AccumulatedMap compose(const FlowField& step, const AccumulatedMap& acc) {
  if (!acc.field().same_shape(step.width(), step.height())) {
    throw InvalidArgumentError("compose: step is " + std::to_string(step.width()) + "x" +
                               std::to_string(step.height()) + " but map is " +
                               std::to_string(acc.width()) + "x" +
                               std::to_string(acc.height()));
  }
  const int w = step.width();
  const int h = step.height();
  std::vector<Vec2> out(static_cast<std::size_t>(w) * static_cast<std::size_t>(h));
#pragma omp parallel for schedule(static)
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const Vec2 d = step.at(x, y);
      const Vec2 p = pixel_center({x, y});
      out[static_cast<std::size_t>(y) * static_cast<std::size_t>(w) +
          static_cast<std::size_t>(x)] = d + sample_flow(acc.field(), p + d);
    }
  }
  return AccumulatedMap(FlowField(w, h, std::move(out)));
}

std::vector<AccumulatedMap> accumulate(const std::vector<FlowField>& steps) {
  std::vector<AccumulatedMap> maps;
  maps.reserve(steps.size());
  for (const FlowField& step : steps) {
    if (maps.empty()) {
      maps.push_back(compose(step, AccumulatedMap::zero(step.width(), step.height())));
    } else {
      maps.push_back(compose(step, maps.back()));
    }
  }
  return maps;
}

FlowKind parse_flow_kind(std::string_view name) {
  if (name == "translate") return FlowKind::kTranslate;
  if (name == "rotate") return FlowKind::kRotate;
  if (name == "swirl") return FlowKind::kSwirl;
  if (name == "zoom") return FlowKind::kZoom;
  throw InvalidArgumentError("unknown flow kind '" + std::string(name) + "'");
}

std::string_view to_string(FlowKind kind) noexcept {
  switch (kind) {
    case FlowKind::kTranslate: return "translate";
    case FlowKind::kRotate: return "rotate";
    case FlowKind::kSwirl: return "swirl";
    case FlowKind::kZoom: return "zoom";
  }
  return "unknown";
}

FlowField make_synthetic_flow(FlowKind kind, const SyntheticFlowParams& params,
                              int width, int height) {
  const double values[] = {params.dx, params.dy, params.angle, params.radius,
                           params.factor};
  for (double v : values) {
    if (!std::isfinite(v)) throw InvalidArgumentError("synthetic flow parameters must be finite");
  }
  if (kind == FlowKind::kZoom && params.factor <= 0.0) {
    throw InvalidArgumentError("zoom factor must be positive");
  }
  if (kind == FlowKind::kSwirl && params.radius <= 0.0) {
    throw InvalidArgumentError("swirl radius must be positive");
  }
  const Vec2 center = params.center.value_or(Vec2{width / 2.0, height / 2.0});

  FlowField flow(width, height);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const Vec2 p = pixel_center({x, y});
      const Vec2 r = p - center;
      Vec2 source = p;
      switch (kind) {
        case FlowKind::kTranslate:
          flow.at(x, y) = {params.dx, params.dy};
          continue;
        case FlowKind::kRotate:
        case FlowKind::kSwirl: {
          double angle = params.angle;
          if (kind == FlowKind::kSwirl) {
            const double rr = (r.x * r.x + r.y * r.y) / (params.radius * params.radius);
            angle *= std::exp(-rr);
          }
          const double c = std::cos(angle);
          const double s = std::sin(angle);
          source = center + Vec2{c * r.x - s * r.y, s * r.x + c * r.y};
          break;
        }
        case FlowKind::kZoom:
          source = center + (1.0 / params.factor) * r;
          break;
      }
      flow.at(x, y) = source - p;
    }
  }
  return flow;
}

}  // namespace noisewarp
