#pragma once

// Reference computations used only by the tests. None of them calls into the
// library's numerical code, so a shared bug cannot make both sides agree.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "noisewarp/geometry.hpp"

namespace oracle {

using noisewarp::Vec2;

/// Catmull-Rom segment between p1 and p2 in the textbook matrix form.
inline double catmull_rom(double p0, double p1, double p2, double p3, double t) {
  return 0.5 * (2.0 * p1 + (-p0 + p2) * t + (2.0 * p0 - 5.0 * p1 + 4.0 * p2 - p3) * t * t +
                (-p0 + 3.0 * p1 - 3.0 * p2 + p3) * t * t * t);
}

/// Sum of squared Catmull-Rom weights at offset t: the variance of a
/// bicubic sample of unit white noise.
inline double catmull_rom_weight_energy(double t) {
  double e = 0.0;
  for (int i = 0; i < 4; ++i) {
    double basis[4] = {0, 0, 0, 0};
    basis[i] = 1.0;
    const double w = catmull_rom(basis[0], basis[1], basis[2], basis[3], t);
    e += w * w;
  }
  return e;
}

inline Vec2 rotate_about(Vec2 p, Vec2 c, double angle) {
  const double cs = std::cos(angle), sn = std::sin(angle);
  const double x = p.x - c.x, y = p.y - c.y;
  return {c.x + cs * x - sn * y, c.y + sn * x + cs * y};
}

/// Area of [ax0, ax1) x [ay0, ay1) intersected with [bx0, bx1) x [by0, by1).
inline double rect_overlap(double ax0, double ax1, double ay0, double ay1, double bx0,
                           double bx1, double by0, double by1) {
  const double w = std::max(0.0, std::min(ax1, bx1) - std::max(ax0, bx0));
  const double h = std::max(0.0, std::min(ay1, by1) - std::max(ay0, by0));
  return w * h;
}

/// Shoelace area, positive for counter-clockwise in a y-up frame.
inline double polygon_area(const std::vector<Vec2>& pts) {
  double a = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const Vec2& p = pts[i];
    const Vec2& q = pts[(i + 1) % pts.size()];
    a += p.x * q.y - q.x * p.y;
  }
  return 0.5 * a;
}

/// Number of level-k sub-pixel centers inside the half-open rectangle.
inline int count_centers(int level, int data_w, int data_h, double x0, double x1, double y0,
                         double y1) {
  const double cell = 1.0 / static_cast<double>(1 << level);
  int n = 0;
  for (int j = 0; j < data_h; ++j) {
    for (int i = 0; i < data_w; ++i) {
      const double cx = (i + 0.5) * cell, cy = (j + 0.5) * cell;
      n += cx >= x0 && cx < x1 && cy >= y0 && cy < y1;
    }
  }
  return n;
}

/// Covariance of the N*N sub-pixels given their parent: I - uu^T / N^2.
inline Eigen::MatrixXd conditional_covariance(int n) {
  const int m = n * n;
  return Eigen::MatrixXd::Identity(m, m) -
         Eigen::MatrixXd::Constant(m, m, 1.0 / static_cast<double>(m));
}

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

/// Plain two-pass sample mean and unbiased variance.
inline std::pair<double, double> mean_variance(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m += x;
  m /= static_cast<double>(v.size());
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return {m, s / static_cast<double>(v.size() - 1)};
}

/// Standard error of the unbiased variance estimate of normal data.
inline double variance_se_normal(double variance, std::size_t n) {
  return variance * std::sqrt(2.0 / static_cast<double>(n - 1));
}

}  // namespace oracle
