#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "noisewarp/flow.hpp"
#include "noisewarp/noise_grid.hpp"
#include "noisewarp/rng.hpp"
#include "noisewarp/stats.hpp"

namespace noisewarp {

/// Warping methods the validation harness can compare.
enum class WarpMethod { kIntNoise, kBilinear, kBicubic, kNearest, kRootBilinear };

WarpMethod parse_warp_method(std::string_view name);
std::string_view to_string(WarpMethod method) noexcept;

/// Paired Monte-Carlo samples: anchors[t] and its warp warped[t].
struct Ensemble {
  std::vector<NoiseGrid> anchors;
  std::vector<NoiseGrid> warped;
  /// Pixels with no coverage (int-noise only); their values are fill noise.
  Mask undefined;
};

/// Draws `trials` independent anchors (trial t uses key.derive(kTrial, t))
/// and warps each through `acc`. Coverage is computed once and shared.
Ensemble warp_ensemble(WarpMethod method, const AccumulatedMap& acc, std::uint64_t trials,
                       int k, int s, const RngKey& key, int channels = 1);

struct ValidationOptions {
  WarpMethod method = WarpMethod::kIntNoise;
  std::uint64_t trials = 100000;
  int k = 3;
  int s = 4;
  int size = 8;
  RngKey key;
};

/// Builds a grouped check: every (value, expected, tolerance) entry must
/// satisfy |value - expected| <= tolerance; the worst entry is reported.
class CheckGroup {
 public:
  explicit CheckGroup(std::string name) : name_(std::move(name)) {}
  void add(double value, double expected, double tolerance);
  CheckResult result() const;

 private:
  std::string name_;
  CheckResult worst_;
  double worst_ratio_ = -1.0;
  std::uint64_t failed_ = 0;
  std::uint64_t total_ = 0;
};

/// Unit variance of checked pixels, pooled KS normality and zero same-sample
/// covariance on the center patch, for one deformation.
std::vector<CheckResult> run_deformation_checks(const std::string& name, WarpMethod method,
                                                const AccumulatedMap& acc, std::uint64_t trials,
                                                int k, int s, const RngKey& key);

/// The statistical suite: translation by 3.6 px, swirl and zoom flows.
/// Checks unit variance of defined pixels, zero same-sample covariance,
/// cross-covariance against the overlap oracle, and pooled KS normality.
StatsReport run_validation(const ValidationOptions& options);

/// Covariance experiment behind the translation scenario: 4x4 warped patch,
/// cross-covariance against the anchor patch holding its sources.
struct CovarianceExperiment {
  StatsReport report;          // covariance + cross_covariance filled
  Patch warped_patch;
  Patch anchor_patch;
  Eigen::MatrixXd oracle;      // expected cross-covariance
  CovarianceEstimate cov;
  CovarianceEstimate cross;
};

CovarianceExperiment run_covariance_experiment(WarpMethod method, double shift,
                                               std::uint64_t trials, int k, int s,
                                               int patch_size, const RngKey& key);

}  // namespace noisewarp
