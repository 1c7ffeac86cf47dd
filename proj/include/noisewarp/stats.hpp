#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "noisewarp/flow.hpp"
#include "noisewarp/geometry.hpp"
#include "noisewarp/noise_grid.hpp"
#include "noisewarp/rng.hpp"

namespace noisewarp {

/// Rectangular block of base pixels on one channel, flattened row-major.
struct Patch {
  int x = 0;
  int y = 0;
  int width = 4;
  int height = 4;
  int channel = 0;

  int size() const noexcept { return width * height; }
  PixelCoord pixel(int i) const noexcept { return {x + i % width, y + i / width}; }
};

/// size x size patch at the grid center.
Patch center_patch(int grid_width, int grid_height, int size = 4);

/// A covariance estimate with its entrywise Monte-Carlo standard error.
struct CovarianceEstimate {
  Eigen::MatrixXd value;
  Eigen::MatrixXd standard_error;
};

/// One named numeric assertion of a validation run.
struct CheckResult {
  std::string name;
  double value = 0.0;
  double expected = 0.0;
  double tolerance = 0.0;
  bool passed = false;
  // For grouped checks: the reported value is the worst entry.
  std::uint64_t failed = 0;
  std::uint64_t total = 1;
};

struct StatsReport {
  static constexpr int kSchemaVersion = 1;

  std::uint64_t sample_count = 0;
  int width = 0;
  int height = 0;
  int channels = 0;
  std::vector<double> mean;
  std::vector<double> variance;
  std::vector<double> variance_standard_error;
  std::optional<Patch> patch;
  Eigen::MatrixXd covariance;
  Eigen::MatrixXd cross_covariance;
  double ks_statistic = 0.0;
  double ks_p_value = 1.0;
  std::vector<CheckResult> checks;

  bool all_passed() const noexcept;
};

std::string to_json(const StatsReport& report, int indent = 2);
StatsReport stats_report_from_json(const std::string& text);

/// Unbiased per-element mean and variance over an ensemble of same-shaped
/// grids (>= 2). Also fills the standard error of each variance estimate.
StatsReport ensemble_moments(std::span<const NoiseGrid> samples);

/// Unbiased covariance of the flattened patch over the ensemble.
CovarianceEstimate covariance(std::span<const NoiseGrid> samples, const Patch& patch);

/// E[(a - mean a)(b - mean b)^T] between paired ensembles; rows index
/// patch_a, columns patch_b.
CovarianceEstimate cross_covariance(std::span<const NoiseGrid> a,
                                    std::span<const NoiseGrid> b,
                                    const Patch& patch_a, const Patch& patch_b);
inline CovarianceEstimate cross_covariance(std::span<const NoiseGrid> a,
                                           std::span<const NoiseGrid> b,
                                           const Patch& patch) {
  return cross_covariance(a, b, patch, patch);
}

/// Maps a target-frame point to its source-frame position.
using BackwardMap = std::function<Vec2(Vec2)>;

BackwardMap backward_map(const FlowField& flow);
BackwardMap translation_map(double dx, double dy);

struct OverlapEstimate {
  double intersection_area = 0.0;  // area(T^-1(A_p) ∩ A_q)
  double preimage_area = 0.0;      // area(T^-1(A_p))

  /// Covariance between the transported pixel p and anchor pixel q.
  double covariance() const noexcept;
};

/// Dense-sampling estimate of how much of warped pixel p's pre-image falls
/// into anchor pixel q, using resolution^2 points inside p and a finite
/// difference Jacobian of the map. Never touches the warp engine.
OverlapEstimate overlap_oracle(const BackwardMap& map, PixelCoord p, PixelCoord q,
                               int resolution = 256);

struct KsResult {
  double statistic = 0.0;
  double p_value = 1.0;
};

/// Asymptotic Kolmogorov distribution tail Q(lambda).
double kolmogorov_tail(double lambda) noexcept;

/// Two-sided one-sample KS test against N(0, 1). Needs >= 100 values.
KsResult ks_normality(std::span<const double> values);

struct BridgeResult {
  // OLS coefficients on (x_prev, x_cur) and their standard errors
  double coef_prev = 0.0;
  double coef_cur = 0.0;
  double coef_prev_se = 0.0;
  double coef_cur_se = 0.0;
  double residual_variance = 0.0;
  double residual_variance_se = 0.0;
  std::uint64_t trials = 0;
};

/// 1-D sliding-window experiment. Two neighbouring unit pixels x_prev, x_cur
/// are refined into 2^k cells each; the window shifted by alpha toward
/// x_prev is re-integrated with the warp normalization and regressed on
/// (x_prev, x_cur).
BridgeResult brownian_bridge_1d(double alpha, int k, std::uint64_t trials,
                                const RngKey& key);

/// Mean over frames of the masked MSE between frame n and the bilinear warp
/// of frame n-1. The mask keeps pixels whose source lies inside the domain
/// and, when given, where masks[n-1] is nonzero.
double warp_error(std::span<const Image> frames, std::span<const FlowField> flows,
                  std::optional<std::span<const Mask>> masks = {});

/// Bilinear backward warp of an image (clamp-to-edge), as used by warp_error.
Image warp_image_bilinear(const Image& image, const FlowField& flow);

}  // namespace noisewarp
