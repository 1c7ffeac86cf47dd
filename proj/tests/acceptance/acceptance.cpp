// Acceptance suite: one PASS/FAIL line per criterion.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cli/commands.hpp"
#include "cli/manifest.hpp"
#include "noisewarp/baselines.hpp"
#include "noisewarp/flow.hpp"
#include "noisewarp/io_formats.hpp"
#include "noisewarp/noise_core.hpp"
#include "noisewarp/stats.hpp"
#include "noisewarp/validation.hpp"
#include "noisewarp/warp_engine.hpp"

namespace fs = std::filesystem;
using namespace noisewarp;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  std::string id;
  std::string title;
  double budget_s;
  std::function<Outcome(const fs::path& work)> run;
};

std::string fmt(double v, int precision = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", precision, v);
  return buf;
}

// Collects named sub-results into one outcome.
class Tally {
 public:
  void add(bool ok, const std::string& what) {
    pass_ = pass_ && ok;
    if (!ok) failures_.push_back(what);
    notes_.push_back(what);
  }
  Outcome outcome() const {
    std::string d;
    const auto& list = failures_.empty() ? notes_ : failures_;
    for (std::size_t i = 0; i < list.size(); ++i) d += (i ? "; " : "") + list[i];
    if (!failures_.empty()) d = std::to_string(failures_.size()) + " failed: " + d;
    return {pass_, d};
  }

 private:
  bool pass_ = true;
  std::vector<std::string> failures_;
  std::vector<std::string> notes_;
};

Outcome a1_reconstruction(const fs::path&) {
  double worst = 0.0;
  for (int n : {2, 4, 8, 16}) {
    for (std::uint64_t i = 0; i < 100; ++i) {
      const NoiseGrid g = sample_noise(16, 12, 3, RngKey{1000 + i, 1});
      const NoiseGrid back = downsample(upsample_conditional(g, n, RngKey{1000 + i, 2}), n);
      double err = 0.0;
      double scale = 0.0;
      for (std::size_t e = 0; e < g.element_count(); ++e) {
        err = std::max(err, static_cast<double>(std::abs(back.data()[e] - g.data()[e])));
        scale = std::max(scale, static_cast<double>(std::abs(g.data()[e])));
      }
      worst = std::max(worst, err / scale);
    }
  }
  return {worst <= 1e-5, "max relative error " + fmt(worst) + " (tol 1e-5)"};
}

Outcome a2_conditional_moments(const fs::path&) {
  const float x = 1.3f;
  const std::uint64_t trials = 100000;
  std::vector<NoiseGrid> blocks;
  blocks.reserve(trials);
  const NoiseGrid pixel(1, 1, 1, 0, {x});
  for (std::uint64_t t = 0; t < trials; ++t) {
    const NoiseGrid up = upsample_conditional(pixel, 2, RngKey{2002, t});
    blocks.emplace_back(2, 2, 1, 0, std::vector<float>(up.data().begin(), up.data().end()));
  }
  const StatsReport m = ensemble_moments(blocks);
  const CovarianceEstimate cov = covariance(blocks, Patch{0, 0, 2, 2, 0});
  Tally tally;
  double worst_mean = 0.0;
  double worst_cov = 0.0;
  for (int i = 0; i < 4; ++i) {
    const double se = std::sqrt(m.variance[static_cast<std::size_t>(i)] / trials);
    const double dev = std::abs(m.mean[static_cast<std::size_t>(i)] - x / 2.0);
    worst_mean = std::max(worst_mean, dev / se);
    for (int j = 0; j < 4; ++j) {
      const double want = (i == j ? 1.0 : 0.0) - 0.25;
      const double d = std::abs(cov.value(i, j) - want);
      worst_cov = std::max(worst_cov, d / cov.standard_error(i, j));
    }
  }
  tally.add(worst_mean <= 4.0, "mean -> x/2: worst " + fmt(worst_mean, 3) + " SE");
  tally.add(worst_cov <= 4.0, "covariance -> I - uu^T/4: worst " + fmt(worst_cov, 3) + " SE, SE " +
                                  fmt(cov.standard_error(0, 1), 3));
  return tally.outcome();
}

Outcome a3_exactness(const fs::path&) {
  const int w = 24;
  const int h = 20;
  const int dx = 3;
  const int dy = -2;
  const NoiseGrid anchor = sample_noise(w, h, 2, RngKey{3003, 0});
  const AccumulatedMap shift(
      FlowField(w, h, std::vector<Vec2>(static_cast<std::size_t>(w * h), Vec2{double(dx), double(dy)})));
  double worst_id = 0.0;
  double worst_shift = 0.0;
  for (int k = 0; k <= 4; ++k) {
    for (int s : {1, 4}) {
      WarpConfig cfg;
      cfg.k = k;
      cfg.s = s;
      cfg.key = RngKey{3003, 1};
      const WarpResult id = warp_noise(anchor, AccumulatedMap::zero(w, h), std::nullopt, cfg);
      for (std::size_t e = 0; e < anchor.element_count(); ++e) {
        worst_id = std::max(worst_id, static_cast<double>(std::abs(id.noise.data()[e] - anchor.data()[e])));
      }
      const WarpResult sh = warp_noise(anchor, shift, std::nullopt, cfg);
      for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
          if (x + dx >= w || y + dy < 0) continue;
          for (int c = 0; c < 2; ++c) {
            worst_shift = std::max(
                worst_shift, static_cast<double>(std::abs(sh.noise.at(x, y, c) - anchor.at(x + dx, y + dy, c))));
          }
        }
      }
    }
  }
  Tally tally;
  tally.add(worst_id <= 1e-5, "identity max error " + fmt(worst_id));
  tally.add(worst_shift <= 1e-5, "integer shift max error " + fmt(worst_shift));
  return tally.outcome();
}

Outcome a4_translation_covariance(const fs::path&) {
  const CovarianceExperiment e =
      run_covariance_experiment(WarpMethod::kIntNoise, 3.6, 100000, 3, 4, 4, RngKey{4004, 0});
  Tally tally;
  // Warped pixel (i, j) draws from anchor columns i+3 (area 0.4) and i+4 (area 0.6).
  double worst = 0.0;
  bool ok = true;
  double sum_near = 0.0;
  double sum_far = 0.0;
  bool oracle_ok = true;
  for (int row = 0; row < 4; ++row) {
    for (int col = 0; col < 4; ++col) {
      const int i = row * 4 + col;
      for (int off = 0; off < 2; ++off) {
        const int j = row * e.anchor_patch.width + col + off;
        const double want = e.oracle(i, j);
        oracle_ok = oracle_ok && std::abs(want - (off == 0 ? 0.4 : 0.6)) <= 1.0 / 256;
        const double tol = 4.0 * e.cross.standard_error(i, j) + 1.0 / 8;
        const double d = std::abs(e.cross.value(i, j) - want);
        ok = ok && d <= tol;
        worst = std::max(worst, d / tol);
        (off == 0 ? sum_near : sum_far) += e.cross.value(i, j);
      }
    }
  }
  tally.add(oracle_ok, "oracle overlaps 0.4/0.6");
  tally.add(ok, "cross-covariance mean " + fmt(sum_far / 16, 3) + " (0.6) / " + fmt(sum_near / 16, 3) +
                    " (0.4), worst |dev|/tol " + fmt(worst, 3));
  double worst_off = 0.0;
  bool off_ok = true;
  for (int i = 0; i < 16; ++i) {
    for (int j = 0; j < 16; ++j) {
      if (i == j) continue;
      const double r = std::abs(e.cov.value(i, j)) / (4.0 * e.cov.standard_error(i, j));
      off_ok = off_ok && r <= 1.0;
      worst_off = std::max(worst_off, r);
    }
  }
  tally.add(off_ok, "off-diagonal covariance worst |c|/(4 SE) " + fmt(worst_off, 3));
  return tally.outcome();
}

Outcome a5_deformation(const fs::path&) {
  const int size = 16;
  SyntheticFlowParams swirl_p;
  swirl_p.angle = 1.0;
  swirl_p.radius = 0.35 * size;
  const FlowField swirl = make_synthetic_flow(FlowKind::kSwirl, swirl_p, size, size);
  SyntheticFlowParams zoom_p;
  zoom_p.factor = 2.0;
  const FlowField zoom = make_synthetic_flow(FlowKind::kZoom, zoom_p, size, size);
  const std::pair<std::string, AccumulatedMap> cases[] = {
      {"swirl", AccumulatedMap(swirl)},
      {"zoom", AccumulatedMap(zoom)},
      {"swirl+zoom", compose(zoom, AccumulatedMap(swirl))}};
  Tally tally;
  std::uint64_t index = 0;
  for (const auto& [name, acc] : cases) {
    for (const CheckResult& c :
         run_deformation_checks(name, WarpMethod::kIntNoise, acc, 10000, 3, 4, RngKey{5005, index++})) {
      const bool wanted = c.name.ends_with(".variance") || c.name.ends_with(".ks_p_value");
      if (!wanted) continue;
      std::string what = c.name + " " + fmt(c.value);
      if (c.total > 1) what += " (" + std::to_string(c.total - c.failed) + "/" + std::to_string(c.total) + " ok)";
      tally.add(c.passed, what);
    }
  }
  return tally.outcome();
}

Outcome a6_bridge(const fs::path&) {
  Tally tally;
  std::uint64_t index = 0;
  for (double alpha : {0.1, 0.25, 0.5, 0.75, 0.9}) {
    const BridgeResult b = brownian_bridge_1d(alpha, 6, 100000, RngKey{6006, index++});
    const bool coef_ok = std::abs(b.coef_prev - alpha) <= 4.0 * b.coef_prev_se &&
                         std::abs(b.coef_cur - (1.0 - alpha)) <= 4.0 * b.coef_cur_se;
    const double want_resid = 1.0 - (alpha * alpha + (1.0 - alpha) * (1.0 - alpha));
    const bool resid_ok =
        std::abs(b.residual_variance - want_resid) <= 4.0 * b.residual_variance_se + 1.0 / 64;
    tally.add(coef_ok && resid_ok, "alpha=" + fmt(alpha, 2) + ": coef (" + fmt(b.coef_prev) + ", " +
                                       fmt(b.coef_cur) + ") 4SE " + fmt(4.0 * b.coef_prev_se, 2) +
                                       ", resid " + fmt(b.residual_variance) + " vs " + fmt(want_resid));
  }
  return tally.outcome();
}

Outcome a7_baseline_deficits(const fs::path&) {
  const int w = 8;
  const int h = 4;
  const AccumulatedMap half(
      FlowField(w, h, std::vector<Vec2>(static_cast<std::size_t>(w * h), Vec2{0.5, 0.0})));
  Tally tally;
  const std::pair<WarpMethod, double> cases[] = {{WarpMethod::kBilinear, 0.5},
                                                 {WarpMethod::kRootBilinear, 1.0}};
  std::uint64_t index = 0;
  for (const auto& [method, want] : cases) {
    const Ensemble ens = warp_ensemble(method, half, 100000, 0, 1, RngKey{7007, index++});
    const StatsReport m = ensemble_moments(ens.warped);
    double worst = 0.0;
    double mean_var = 0.0;
    int n = 0;
    // Columns whose sample point sits between two in-domain centers.
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x + 1 < w; ++x) {
        const std::size_t p = static_cast<std::size_t>(y * w + x);
        worst = std::max(worst, std::abs(m.variance[p] - want) / (4.0 * m.variance_standard_error[p]));
        mean_var += m.variance[p];
        ++n;
      }
    }
    tally.add(worst <= 1.0, std::string(to_string(method)) + " variance " + fmt(mean_var / n) +
                                " (want " + fmt(want) + "), worst |dev|/4SE " + fmt(worst, 3));
  }
  return tally.outcome();
}

Outcome a8_ablation(const fs::path&) {
  const int size = 256;
  SyntheticFlowParams p;
  p.angle = 0.12;
  p.radius = size / 4.0;
  const std::vector<FlowField> steps(24, make_synthetic_flow(FlowKind::kSwirl, p, size, size));
  const AccumulatedMap last = accumulate(steps).back();
  std::vector<double> ratio;
  for (int k = 0; k <= 4; ++k) {
    const auto counts = build_coverage(last.field(), k, 4).coverage_counts();
    ratio.push_back(static_cast<double>(std::count(counts.begin(), counts.end(), 0)) /
                    static_cast<double>(counts.size()));
  }
  bool monotone = true;
  bool first_largest = true;
  for (int k = 1; k <= 4; ++k) {
    monotone = monotone && ratio[k] <= ratio[k - 1];
    if (k > 1) first_largest = first_largest && (ratio[0] - ratio[1]) > (ratio[k - 1] - ratio[k]);
  }
  std::string r;
  for (int k = 0; k <= 4; ++k) r += (k ? ", " : "") + fmt(ratio[static_cast<std::size_t>(k)]);
  Tally tally;
  tally.add(monotone, "frame-24 undefined ratio by k: " + r);
  tally.add(first_largest, "k=0->1 drop is the largest");
  return tally.outcome();
}

struct Command {
  std::string name;
  std::vector<std::string> args;  // after the subcommand, without --out
};

// Runs each command with 8 threads, replays it with 1 and 8 threads, and
// compares every deterministic output checksum.
Outcome a9_determinism(const fs::path& work) {
  fs::remove_all(work);
  fs::create_directories(work);
  const std::string in = (work / "gen" / "noise_0000.grid").string();
  const std::string flows = (work / "make_flows").string();
  const std::string frames = (work / "frames").string();
  fs::create_directories(frames);
  for (int n = 0; n < 3; ++n) {
    Raster<std::uint8_t> img(24, 20, 3);
    for (std::size_t i = 0; i < img.data.size(); ++i) img.data[i] = static_cast<std::uint8_t>((i * 7 + n * 50) % 256);
    char name[32];
    std::snprintf(name, sizeof name, "frame_%02d.png", n);
    write_png(img, fs::path(frames) / name);
  }
  const std::vector<Command> commands = {
      {"gen", {"--width", "24", "--height", "20", "--channels", "2", "--count", "2", "--seed", "9", "--npy", "--png"}},
      {"make_flows", {"--width", "24", "--height", "20", "--frames", "3", "--flow", "swirl", "--angle", "0.3"}},
      {"upsample", {"--in", in, "--factor", "4", "--seed", "2"}},
      {"warp", {"--in", in, "--flows", flows, "--k", "3", "--seed", "4", "--png"}},
      {"baseline", {"--scheme", "bicubic", "--in", in, "--flows", flows}},
      {"baseline", {"--scheme", "pyoco_progressive", "--in", in, "--count", "4", "--alpha", "0.7"}},
      {"baseline", {"--scheme", "residual", "--frames", frames, "--threshold", "0.1", "--seed", "3"}},
      {"validate", {"--trials", "3000", "--size", "8", "--seed", "5"}},
      {"covariance", {"--trials", "3000", "--seed", "6"}},
      {"ablate_k", {"--size", "32", "--frames", "3", "--kmax", "2"}},
      {"bench", {"--size", "32", "--frames", "2", "--kmax", "1", "--smax", "2", "--seed", "7"}},
  };
  std::ostringstream sink;
  Tally tally;
  std::size_t compared = 0;
  for (std::size_t i = 0; i < commands.size(); ++i) {
    const Command& c = commands[i];
    const std::string tag = c.name == "baseline" ? "baseline" + std::to_string(i) : c.name;
    const fs::path original = work / tag;
    std::vector<std::string> args = {"--threads", "8", c.name};
    args.insert(args.end(), c.args.begin(), c.args.end());
    args.push_back("--out");
    args.push_back(original.string());
    const int rc = cli::run(args, sink, sink);
    if (rc != cli::kExitOk && rc != cli::kExitValidation) {
      tally.add(false, tag + " exited " + std::to_string(rc));
      continue;
    }
    const cli::RunManifest want = cli::read_manifest(original / "manifest.json");
    bool same = true;
    for (const char* threads : {"1", "8"}) {
      const fs::path replay = work / (tag + "_replay" + threads);
      const int rrc = cli::run({"--threads", threads, "replay", "--manifest",
                                (original / "manifest.json").string(), "--out", replay.string()},
                               sink, sink);
      if (rrc != rc) {
        same = false;
        continue;
      }
      const cli::RunManifest got = cli::read_manifest(replay / "manifest.json");
      same = same && got.outputs.size() == want.outputs.size();
      for (std::size_t o = 0; same && o < want.outputs.size(); ++o) {
        if (!want.outputs[o].deterministic) continue;
        same = got.outputs[o].path == want.outputs[o].path &&
               got.outputs[o].checksum == want.outputs[o].checksum;
        ++compared;
      }
    }
    tally.add(same, tag + (same ? " identical" : " differs"));
  }
  Outcome o = tally.outcome();
  if (o.pass) o.detail = std::to_string(commands.size()) + " commands, " + std::to_string(compared) +
                         " output comparisons bit-identical at threads {1, 8}";
  return o;
}

Outcome a10_bench(const fs::path& work) {
  fs::remove_all(work);
  std::ostringstream sink;
  const int rc = cli::run({"bench", "--flow", "swirl", "--size", "256", "--frames", "24", "--kmin", "0",
                           "--kmax", "4", "--smin", "1", "--smax", "4", "--out", work.string()},
                          sink, sink);
  if (rc != cli::kExitOk) return {false, "bench exited " + std::to_string(rc)};
  std::ifstream csv(work / "bench.csv");
  std::string line;
  std::getline(csv, line);
  std::map<int, double> cpu_by_k;
  std::map<int, double> wall_by_k;
  int rows = 0;
  while (std::getline(csv, line)) {
    std::vector<std::string> f;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) f.push_back(cell);
    if (f.size() != 12 || f[2] != "24" || f[3] != "256" || f[4] != "256") {
      return {false, "malformed bench row: " + line};
    }
    const int k = std::stoi(f[0]);
    wall_by_k[k] += std::stod(f[7]);
    cpu_by_k[k] += std::stod(f[8]);
    ++rows;
  }
  Tally tally;
  tally.add(rows == 20, std::to_string(rows) + "/20 (k, s) rows");
  bool monotone = cpu_by_k.size() == 5;
  std::string totals;
  for (int k = 0; k <= 4; ++k) {
    if (k > 0) monotone = monotone && cpu_by_k[k] > cpu_by_k[k - 1];
    totals += (k ? ", " : "") + fmt(cpu_by_k[k] / 1000.0, 3) + "s";
  }
  tally.add(monotone, "CPU time summed over s, by k: " + totals);
  std::string walls;
  for (int k = 0; k <= 4; ++k) walls += (k ? ", " : "") + fmt(wall_by_k[k] / 1000.0, 3) + "s";
  tally.add(true, "wall time by k: " + walls);
  return tally.outcome();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"noisewarp acceptance suite"};
  std::vector<std::string> only;
  std::string work = (fs::temp_directory_path() / "noisewarp_acceptance").string();
  app.add_option("--only", only, "criteria to run, e.g. A4 (default: all)");
  app.add_option("--work", work, "scratch directory");
  CLI11_PARSE(app, argc, argv);

  const std::vector<Criterion> criteria = {
      {"A1", "reconstruction identity", 10, a1_reconstruction},
      {"A2", "conditional moments", 30, a2_conditional_moments},
      {"A3", "identity and integer-translation exactness", 60, a3_exactness},
      {"A4", "translation covariance (3.6 px)", 300, a4_translation_covariance},
      {"A5", "distribution preservation under deformation", 600, a5_deformation},
      {"A6", "Brownian-bridge regression", 120, a6_bridge},
      {"A7", "baseline variance deficits", 60, a7_baseline_deficits},
      {"A8", "undefined-pixel ablation over k", 600, a8_ablation},
      {"A9", "manifest replay determinism", 300, a9_determinism},
      {"A10", "bench harness", 1800, a10_bench},
  };
  for (const std::string& id : only) {
    if (std::none_of(criteria.begin(), criteria.end(), [&](const Criterion& c) { return c.id == id; })) {
      std::cerr << "unknown criterion " << id << "\n";
      return 2;
    }
  }

  int failed = 0;
  int ran = 0;
  for (const Criterion& c : criteria) {
    if (!only.empty() && std::find(only.begin(), only.end(), c.id) == only.end()) continue;
    ++ran;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run(fs::path(work) / c.id);
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (secs > c.budget_s) {
      o.pass = false;
      o.detail += "; runtime " + fmt(secs, 3) + " s over budget " + fmt(c.budget_s, 4) + " s";
    }
    std::cout << (o.pass ? "PASS " : "FAIL ") << c.id << " " << c.title << ": " << o.detail << " ["
              << fmt(secs, 3) << " s]" << std::endl;
    failed += o.pass ? 0 : 1;
  }
  std::cout << ran - failed << "/" << ran << " criteria passed" << std::endl;
  return failed == 0 ? 0 : 1;
}
