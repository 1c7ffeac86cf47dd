#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "noisewarp/baselines.hpp"
#include "noisewarp/error.hpp"
#include "noisewarp/noise_core.hpp"
#include "noisewarp/stats.hpp"
#include "oracles.hpp"

namespace noisewarp {
namespace {

AccumulatedMap shift_map(int w, int h, Vec2 d) {
  return AccumulatedMap(FlowField(w, h, std::vector<Vec2>(static_cast<std::size_t>(w) * h, d)));
}

std::vector<NoiseGrid> interp_ensemble(InterpScheme scheme, const AccumulatedMap& acc, int trials,
                                       std::uint64_t seed) {
  std::vector<NoiseGrid> out;
  out.reserve(static_cast<std::size_t>(trials));
  for (int t = 0; t < trials; ++t) {
    out.push_back(warp_interp(sample_noise(acc.width(), acc.height(), 1,
                                           RngKey{seed, static_cast<std::uint64_t>(t)}),
                              acc, scheme));
  }
  return out;
}

TEST(WarpInterp, ZeroFlowIsIdentity) {
  const NoiseGrid g = sample_noise(7, 5, 3, RngKey{1, 0});
  for (auto s : {InterpScheme::kBilinear, InterpScheme::kBicubic, InterpScheme::kNearest,
                 InterpScheme::kRootBilinear}) {
    EXPECT_EQ(warp_interp(g, AccumulatedMap::zero(7, 5), s), g);
  }
}

TEST(WarpInterp, NearestIntegerShiftIsExactCopy) {
  const NoiseGrid g = sample_noise(8, 6, 2, RngKey{1, 0});
  const NoiseGrid out = warp_interp(g, shift_map(8, 6, {2.0, 1.0}), InterpScheme::kNearest);
  for (int y = 0; y + 1 < 6; ++y) {
    for (int x = 0; x + 2 < 8; ++x) {
      for (int c = 0; c < 2; ++c) EXPECT_EQ(out.at(x, y, c), g.at(x + 2, y + 1, c));
    }
  }
}

TEST(WarpInterp, DimensionMismatchThrows) {
  EXPECT_THROW(warp_interp(NoiseGrid(4, 4, 1), AccumulatedMap::zero(4, 3), InterpScheme::kBilinear),
               InvalidArgumentError);
}

TEST(WarpInterp, BilinearHalfShiftHalvesVariance) {
  const auto ens = interp_ensemble(InterpScheme::kBilinear, shift_map(8, 3, {0.5, 0.0}), 20000, 2);
  const StatsReport m = ensemble_moments(ens);
  for (int x = 0; x < 7; ++x) {
    const auto i = static_cast<std::size_t>(8 + x);  // row 1
    EXPECT_NEAR(m.variance[i], 0.5, 4.0 * m.variance_standard_error[i]);
  }
}

TEST(WarpInterp, RootBilinearHalfShiftKeepsUnitVariance) {
  const auto ens =
      interp_ensemble(InterpScheme::kRootBilinear, shift_map(8, 3, {0.5, 0.0}), 20000, 3);
  const StatsReport m = ensemble_moments(ens);
  for (int x = 0; x < 7; ++x) {
    const auto i = static_cast<std::size_t>(8 + x);
    EXPECT_NEAR(m.variance[i], 1.0, 4.0 * m.variance_standard_error[i]);
  }
}

TEST(WarpInterp, BicubicVarianceIsWeightEnergy) {
  const auto ens = interp_ensemble(InterpScheme::kBicubic, shift_map(10, 3, {0.6, 0.0}), 20000, 4);
  const StatsReport m = ensemble_moments(ens);
  const double want = oracle::catmull_rom_weight_energy(0.6);
  EXPECT_LT(want, 1.0);
  for (int x = 1; x < 7; ++x) {
    const auto i = static_cast<std::size_t>(10 + x);
    EXPECT_NEAR(m.variance[i], want, 4.0 * m.variance_standard_error[i]);
  }
}

TEST(WarpInterp, BilinearVarianceIsQuadraticInShift) {
  for (double alpha : {0.1, 0.25, 0.75}) {
    const auto ens =
        interp_ensemble(InterpScheme::kBilinear, shift_map(6, 1, {alpha, 0.0}), 20000, 5);
    const StatsReport m = ensemble_moments(ens);
    const double want = alpha * alpha + (1 - alpha) * (1 - alpha);
    for (int x = 0; x < 5; ++x) {
      EXPECT_NEAR(m.variance[static_cast<std::size_t>(x)], want,
                  4.0 * m.variance_standard_error[static_cast<std::size_t>(x)]);
    }
  }
}

TEST(Priors, FixedRepeatsOneGrid) {
  PriorSpec spec;
  spec.kind = PriorKind::kFixed;
  const auto frames = generate_prior(spec, 3, {5, 4, 2});
  ASSERT_EQ(frames.size(), 3u);
  EXPECT_EQ(frames[0], frames[1]);
  EXPECT_EQ(frames[1], frames[2]);
}

TEST(Priors, RandomFramesDiffer) {
  PriorSpec spec;
  spec.kind = PriorKind::kRandom;
  const auto frames = generate_prior(spec, 3, {5, 4, 1});
  EXPECT_NE(frames[0], frames[1]);
  EXPECT_NE(frames[1], frames[2]);
}

TEST(Priors, PyocoWeightsHaveUnitEnergy) {
  for (double a : {0.0, 0.5, 1.0, 3.0}) {
    const auto [s, f] = pyoco_weights(a);
    EXPECT_NEAR(s * s + f * f, 1.0, 1e-15);
    EXPECT_NEAR(s * s, a * a / (1 + a * a), 1e-15);
  }
}

struct PriorEnsemble {
  std::vector<std::vector<NoiseGrid>> per_frame;
};

PriorEnsemble prior_ensemble(PriorKind kind, double alpha, int n_frames, int trials) {
  PriorEnsemble e;
  e.per_frame.resize(static_cast<std::size_t>(n_frames));
  for (int t = 0; t < trials; ++t) {
    PriorSpec spec;
    spec.kind = kind;
    spec.alpha = alpha;
    spec.key = RngKey{17, static_cast<std::uint64_t>(t)};
    auto frames = generate_prior(spec, n_frames, {2, 2, 1});
    for (int n = 0; n < n_frames; ++n) {
      e.per_frame[static_cast<std::size_t>(n)].push_back(std::move(frames[static_cast<std::size_t>(n)]));
    }
  }
  return e;
}

TEST(Priors, PyocoMixedMoments) {
  const double alpha = 1.0;
  const auto e = prior_ensemble(PriorKind::kPyocoMixed, alpha, 3, 20000);
  const Patch pixel{0, 0, 2, 2, 0};
  for (const auto& frame : e.per_frame) {
    const StatsReport m = ensemble_moments(frame);
    for (std::size_t i = 0; i < 4; ++i) {
      EXPECT_NEAR(m.variance[i], 1.0, 4.0 * m.variance_standard_error[i]);
    }
  }
  const CovarianceEstimate c = cross_covariance(e.per_frame[0], e.per_frame[2], pixel);
  for (int i = 0; i < 4; ++i) {
    EXPECT_NEAR(c.value(i, i), alpha * alpha / (1 + alpha * alpha), 4.0 * c.standard_error(i, i));
  }
}

TEST(Priors, PyocoProgressiveLagCorrelation) {
  // The recurrence keeps unit variance, so one step correlates by
  // sqrt(alpha^2 / (1 + alpha^2)) and lag m by its m-th power.
  const double alpha = 1.5;
  const double rho = std::sqrt(alpha * alpha / (1 + alpha * alpha));
  const auto e = prior_ensemble(PriorKind::kPyocoProgressive, alpha, 4, 20000);
  const Patch pixel{0, 0, 2, 2, 0};
  for (int lag = 1; lag <= 3; ++lag) {
    const CovarianceEstimate c =
        cross_covariance(e.per_frame[0], e.per_frame[static_cast<std::size_t>(lag)], pixel);
    for (int i = 0; i < 4; ++i) {
      EXPECT_NEAR(c.value(i, i), std::pow(rho, lag), 4.0 * c.standard_error(i, i)) << lag;
    }
  }
  const StatsReport last = ensemble_moments(e.per_frame[3]);
  for (std::size_t i = 0; i < 4; ++i) {
    EXPECT_NEAR(last.variance[i], 1.0, 4.0 * last.variance_standard_error[i]);
  }
}

TEST(Priors, ResidualKeepsUnchangedPixels) {
  Image a(3, 2, 3, 0.2f);
  Image b = a;
  b.at(1, 1, 2) = 0.9f;  // one pixel changes by 0.7 in one channel
  const std::vector<Image> frames = {a, a, b};
  PriorSpec spec;
  spec.kind = PriorKind::kResidual;
  spec.threshold = 0.1;
  const auto out = generate_prior(spec, 3, {3, 2, 2}, frames);
  EXPECT_EQ(out[0], out[1]);
  for (int y = 0; y < 2; ++y) {
    for (int x = 0; x < 3; ++x) {
      for (int c = 0; c < 2; ++c) {
        if (x == 1 && y == 1) {
          EXPECT_NE(out[2].at(x, y, c), out[1].at(x, y, c));
        } else {
          EXPECT_EQ(out[2].at(x, y, c), out[1].at(x, y, c));
        }
      }
    }
  }
}

TEST(Priors, ResidualNeedsFrames) {
  PriorSpec spec;
  spec.kind = PriorKind::kResidual;
  EXPECT_THROW(generate_prior(spec, 2, {3, 2, 1}), InvalidArgumentError);
  const std::vector<Image> one = {Image(3, 2, 1)};
  EXPECT_THROW(generate_prior(spec, 2, {3, 2, 1}, one), InvalidArgumentError);
}

TEST(Priors, InvalidSpecThrows) {
  PriorSpec spec;
  spec.alpha = -1.0;
  EXPECT_THROW(generate_prior(spec, 2, {2, 2, 1}), InvalidArgumentError);
  spec.alpha = 1.0;
  spec.threshold = std::nan("");
  EXPECT_THROW(generate_prior(spec, 2, {2, 2, 1}), InvalidArgumentError);
  EXPECT_THROW(parse_prior_kind("gaussian"), InvalidArgumentError);
  EXPECT_THROW(parse_interp_scheme("lanczos"), InvalidArgumentError);
}

}  // namespace
}  // namespace noisewarp
