#include "noisewarp/validation.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "noisewarp/baselines.hpp"
#include "noisewarp/error.hpp"
#include "noisewarp/noise_core.hpp"
#include "noisewarp/warp_engine.hpp"

namespace noisewarp {
namespace {

constexpr std::size_t kKsCap = 200000;
constexpr int kOracleResolution = 256;

InterpScheme interp_scheme_of(WarpMethod method) {
  switch (method) {
    case WarpMethod::kBilinear: return InterpScheme::kBilinear;
    case WarpMethod::kBicubic: return InterpScheme::kBicubic;
    case WarpMethod::kNearest: return InterpScheme::kNearest;
    case WarpMethod::kRootBilinear: return InterpScheme::kRootBilinear;
    case WarpMethod::kIntNoise: break;
  }
  throw InvalidArgumentError("int-noise has no interpolation scheme");
}

// Pixels whose statistics the suite checks. Int-noise: covered pixels.
// Interpolation: pixels whose source point lies inside the domain.
std::vector<bool> checked_pixels(WarpMethod method, const Ensemble& ens,
                                 const AccumulatedMap& acc) {
  const int w = acc.width();
  const int h = acc.height();
  std::vector<bool> keep(static_cast<std::size_t>(w) * static_cast<std::size_t>(h));
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const std::size_t p = static_cast<std::size_t>(y) * static_cast<std::size_t>(w) +
                            static_cast<std::size_t>(x);
      if (method == WarpMethod::kIntNoise) {
        keep[p] = ens.undefined.data[p] == 0;
      } else {
        const Vec2 src = pixel_center({x, y}) + acc.field().at(x, y);
        keep[p] = src.x >= 0.0 && src.x <= w && src.y >= 0.0 && src.y <= h;
      }
    }
  }
  return keep;
}

void add_variance_and_ks(StatsReport& report, const std::string& prefix, WarpMethod method,
                         const Ensemble& ens, const AccumulatedMap& acc, bool fill_moments) {
  const StatsReport moments = ensemble_moments(ens.warped);
  const std::vector<bool> keep = checked_pixels(method, ens, acc);
  const int channels = ens.warped.front().channels();

  CheckGroup variance(prefix + ".variance");
  for (std::size_t p = 0; p < keep.size(); ++p) {
    if (!keep[p]) continue;
    for (int c = 0; c < channels; ++c) {
      const std::size_t i = p * static_cast<std::size_t>(channels) + static_cast<std::size_t>(c);
      variance.add(moments.variance[i], 1.0, 4.0 * moments.variance_standard_error[i]);
    }
  }
  report.checks.push_back(variance.result());

  std::vector<double> pooled;
  for (const NoiseGrid& g : ens.warped) {
    const auto d = g.data();
    for (std::size_t p = 0; p < keep.size() && pooled.size() < kKsCap; ++p) {
      if (!keep[p]) continue;
      for (int c = 0; c < channels; ++c) {
        pooled.push_back(d[p * static_cast<std::size_t>(channels) + static_cast<std::size_t>(c)]);
      }
    }
    if (pooled.size() >= kKsCap) break;
  }
  if (pooled.size() >= 100) {
    const KsResult ks = ks_normality(pooled);
    CheckResult r{prefix + ".ks_p_value", ks.p_value, 0.01, 0.0, ks.p_value > 0.01};
    r.failed = r.passed ? 0 : 1;
    report.checks.push_back(r);
    if (fill_moments) {
      report.ks_statistic = ks.statistic;
      report.ks_p_value = ks.p_value;
    }
  }
  if (fill_moments) {
    report.mean = moments.mean;
    report.variance = moments.variance;
    report.variance_standard_error = moments.variance_standard_error;
  }
}

void add_offdiagonal_check(std::vector<CheckResult>& checks, const std::string& name,
                           const CovarianceEstimate& cov) {
  CheckGroup group(name);
  for (Eigen::Index i = 0; i < cov.value.rows(); ++i) {
    for (Eigen::Index j = 0; j < cov.value.cols(); ++j) {
      if (i != j) group.add(cov.value(i, j), 0.0, 4.0 * cov.standard_error(i, j));
    }
  }
  checks.push_back(group.result());
}

FlowField swirl_flow(int size) {
  SyntheticFlowParams params;
  params.angle = 1.0;
  params.radius = 0.35 * size;
  return make_synthetic_flow(FlowKind::kSwirl, params, size, size);
}

FlowField zoom_flow(int size) {
  SyntheticFlowParams params;
  params.factor = 2.0;
  return make_synthetic_flow(FlowKind::kZoom, params, size, size);
}

}  // namespace

WarpMethod parse_warp_method(std::string_view name) {
  if (name == "intnoise") return WarpMethod::kIntNoise;
  if (name == "bilinear") return WarpMethod::kBilinear;
  if (name == "bicubic") return WarpMethod::kBicubic;
  if (name == "nearest") return WarpMethod::kNearest;
  if (name == "root_bilinear") return WarpMethod::kRootBilinear;
  throw InvalidArgumentError("unknown method '" + std::string(name) +
                             "' (expected intnoise, bilinear, bicubic, nearest, root_bilinear)");
}

std::string_view to_string(WarpMethod method) noexcept {
  switch (method) {
    case WarpMethod::kIntNoise: return "intnoise";
    case WarpMethod::kBilinear: return "bilinear";
    case WarpMethod::kBicubic: return "bicubic";
    case WarpMethod::kNearest: return "nearest";
    case WarpMethod::kRootBilinear: return "root_bilinear";
  }
  return "unknown";
}

Ensemble warp_ensemble(WarpMethod method, const AccumulatedMap& acc, std::uint64_t trials,
                       int k, int s, const RngKey& key, int channels) {
  if (trials < 2) throw InvalidArgumentError("an ensemble needs at least 2 trials");
  WarpConfig cfg;
  cfg.k = k;
  cfg.s = s;
  cfg.validate();
  const int w = acc.width();
  const int h = acc.height();

  Ensemble ens;
  ens.anchors.resize(trials);
  ens.warped.resize(trials);
  ens.undefined = Mask(w, h, 1, 0);

  CoverageBuffer coverage;
  if (method == WarpMethod::kIntNoise) {
    coverage = build_coverage(acc.field(), k, s);
    const auto counts = coverage.coverage_counts();
    for (std::size_t p = 0; p < counts.size(); ++p) ens.undefined.data[p] = counts[p] == 0;
  }

  const auto n = static_cast<std::int64_t>(trials);
#pragma omp parallel for schedule(dynamic, 64)
  for (std::int64_t t = 0; t < n; ++t) {
    const RngKey trial_key = key.derive(stream_tag::kTrial, static_cast<std::uint64_t>(t));
    NoiseGrid anchor = sample_noise(w, h, channels, trial_key);
    if (method == WarpMethod::kIntNoise) {
      WarpConfig trial_cfg = cfg;
      trial_cfg.key = trial_key;
      WarpResult r = aggregate(coverage, upsample_anchor(anchor, trial_cfg), &anchor);
      // Same fill the engine uses for pixels without coverage.
      const RngKey fill_key = trial_key.derive(stream_tag::kRandomFill, 1);
      auto out = r.noise.data();
      for (std::size_t p = 0; p < r.fill_source.size(); ++p) {
        if (r.fill_source[p] != FillSource::kRandom) continue;
        for (int c = 0; c < channels; ++c) {
          const std::size_t idx = p * static_cast<std::size_t>(channels) + static_cast<std::size_t>(c);
          out[idx] = static_cast<float>(standard_normal_at(fill_key, idx));
        }
      }
      ens.warped[static_cast<std::size_t>(t)] = std::move(r.noise);
    } else {
      ens.warped[static_cast<std::size_t>(t)] =
          warp_interp(anchor, acc, interp_scheme_of(method));
    }
    ens.anchors[static_cast<std::size_t>(t)] = std::move(anchor);
  }
  return ens;
}

void CheckGroup::add(double value, double expected, double tolerance) {
  const double dev = std::abs(value - expected);
  const bool ok = dev <= tolerance;
  ++total_;
  if (!ok) ++failed_;
  const double ratio = tolerance > 0.0 ? dev / tolerance : (dev > 0.0 ? HUGE_VAL : 0.0);
  if (ratio > worst_ratio_) {
    worst_ratio_ = ratio;
    worst_ = CheckResult{name_, value, expected, tolerance, ok};
  }
}

CheckResult CheckGroup::result() const {
  CheckResult r = worst_;
  r.name = name_;
  r.failed = failed_;
  r.total = total_;
  r.passed = total_ > 0 && failed_ == 0;
  return r;
}

CovarianceExperiment run_covariance_experiment(WarpMethod method, double shift,
                                               std::uint64_t trials, int k, int s,
                                               int patch_size, const RngKey& key) {
  if (!std::isfinite(shift) || std::abs(shift) > 64.0) {
    throw InvalidArgumentError("shift must be finite with |shift| <= 64");
  }
  if (patch_size < 1 || patch_size > 16) throw InvalidArgumentError("patch size must lie in [1, 16]");
  const int margin = 2 + static_cast<int>(std::ceil(std::abs(shift)));
  const int width = 2 * margin + patch_size + 1;
  const int height = patch_size + 4;
  const FlowField flow(width, height,
                       std::vector<Vec2>(static_cast<std::size_t>(width) * height, Vec2{shift, 0.0}));
  const AccumulatedMap acc(flow);
  const Ensemble ens = warp_ensemble(method, acc, trials, k, s, key);

  CovarianceExperiment exp;
  exp.warped_patch = Patch{margin, 2, patch_size, patch_size, 0};
  const int first_source = margin + static_cast<int>(std::floor(shift));
  const bool fractional = shift != std::floor(shift);
  exp.anchor_patch = Patch{first_source, 2, patch_size + (fractional ? 1 : 0), patch_size, 0};

  exp.cov = covariance(ens.warped, exp.warped_patch);
  exp.cross = cross_covariance(ens.warped, ens.anchors, exp.warped_patch, exp.anchor_patch);
  const BackwardMap map = translation_map(shift, 0.0);
  exp.oracle.resize(exp.warped_patch.size(), exp.anchor_patch.size());
  for (int i = 0; i < exp.warped_patch.size(); ++i) {
    for (int j = 0; j < exp.anchor_patch.size(); ++j) {
      exp.oracle(i, j) = overlap_oracle(map, exp.warped_patch.pixel(i),
                                        exp.anchor_patch.pixel(j), kOracleResolution)
                             .covariance();
    }
  }

  StatsReport& report = exp.report;
  report.sample_count = trials;
  report.width = width;
  report.height = height;
  report.channels = 1;
  report.patch = exp.warped_patch;
  report.covariance = exp.cov.value;
  report.cross_covariance = exp.cross.value;
  add_variance_and_ks(report, "translate", method, ens, acc, true);
  add_offdiagonal_check(report.checks, "translate.covariance_offdiagonal", exp.cov);
  CheckGroup cross("translate.cross_covariance");
  const double slack = 1.0 / static_cast<double>(1 << k);
  for (Eigen::Index i = 0; i < exp.oracle.rows(); ++i) {
    for (Eigen::Index j = 0; j < exp.oracle.cols(); ++j) {
      cross.add(exp.cross.value(i, j), exp.oracle(i, j),
                4.0 * exp.cross.standard_error(i, j) + slack);
    }
  }
  report.checks.push_back(cross.result());
  return exp;
}

std::vector<CheckResult> run_deformation_checks(const std::string& name, WarpMethod method,
                                                const AccumulatedMap& acc, std::uint64_t trials,
                                                int k, int s, const RngKey& key) {
  const Ensemble ens = warp_ensemble(method, acc, trials, k, s, key);
  StatsReport scratch;
  add_variance_and_ks(scratch, name, method, ens, acc, false);
  const Patch patch = center_patch(acc.width(), acc.height(), std::min({4, acc.width(), acc.height()}));
  add_offdiagonal_check(scratch.checks, name + ".covariance_offdiagonal",
                        covariance(ens.warped, patch));
  return scratch.checks;
}

StatsReport run_validation(const ValidationOptions& options) {
  if (options.trials < 2) throw InvalidArgumentError("validation needs at least 2 trials");
  if (options.size < 6 || options.size > 64) throw InvalidArgumentError("size must lie in [6, 64]");

  StatsReport report = run_covariance_experiment(options.method, 3.6, options.trials, options.k,
                                                 options.s, 4, options.key.derive(1))
                           .report;

  const std::pair<const char*, FlowField> scenarios[] = {
      {"swirl", swirl_flow(options.size)}, {"zoom", zoom_flow(options.size)}};
  std::uint64_t index = 2;
  for (const auto& [name, flow] : scenarios) {
    for (CheckResult& c : run_deformation_checks(name, options.method, AccumulatedMap(flow),
                                                 options.trials, options.k, options.s,
                                                 options.key.derive(index++))) {
      report.checks.push_back(std::move(c));
    }
  }

  // The 1-D sliding-window regression; it exercises the engine's
  // refinement, so only int-noise is checked against it.
  if (options.method == WarpMethod::kIntNoise && options.trials >= 10000) {
    for (double alpha : {0.25, 0.5, 0.75}) {
      const BridgeResult b = brownian_bridge_1d(alpha, options.k, options.trials,
                                                options.key.derive(index++));
      const std::string prefix = "bridge[alpha=" + std::to_string(alpha).substr(0, 4) + "]";
      CheckGroup coefs(prefix + ".coefficients");
      coefs.add(b.coef_prev, alpha, 4.0 * b.coef_prev_se);
      coefs.add(b.coef_cur, 1.0 - alpha, 4.0 * b.coef_cur_se);
      report.checks.push_back(coefs.result());
      CheckGroup resid(prefix + ".residual_variance");
      resid.add(b.residual_variance, 1.0 - (alpha * alpha + (1.0 - alpha) * (1.0 - alpha)),
                4.0 * b.residual_variance_se + 1.0 / static_cast<double>(1 << options.k));
      report.checks.push_back(resid.result());
    }
  }
  return report;
}

}  // namespace noisewarp
