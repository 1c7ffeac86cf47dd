#pragma once

#include <cmath>

namespace noisewarp {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  Vec2& operator+=(const Vec2& o) noexcept { x += o.x; y += o.y; return *this; }
  Vec2& operator-=(const Vec2& o) noexcept { x -= o.x; y -= o.y; return *this; }
  friend Vec2 operator+(Vec2 a, const Vec2& b) noexcept { return a += b; }
  friend Vec2 operator-(Vec2 a, const Vec2& b) noexcept { return a -= b; }
  friend Vec2 operator*(double s, const Vec2& v) noexcept { return {s * v.x, s * v.y}; }
  friend Vec2 operator*(const Vec2& v, double s) noexcept { return {s * v.x, s * v.y}; }
  friend bool operator==(const Vec2&, const Vec2&) = default;
};

inline double cross(const Vec2& a, const Vec2& b) noexcept { return a.x * b.y - a.y * b.x; }
inline double norm(const Vec2& v) noexcept { return std::hypot(v.x, v.y); }

/// Integer pixel coordinate on the base grid; pixel (x, y) covers
/// [x, x+1] x [y, y+1] and its center is (x + 0.5, y + 0.5).
struct PixelCoord {
  int x = 0;
  int y = 0;
  friend bool operator==(const PixelCoord&, const PixelCoord&) = default;
};

inline Vec2 pixel_center(PixelCoord p) noexcept { return {p.x + 0.5, p.y + 0.5}; }

}  // namespace noisewarp
