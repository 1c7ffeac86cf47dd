#include "cli/commands.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <concepts>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include <CLI11.hpp>
#include <json.hpp>

#include "cli/manifest.hpp"
#include "noisewarp/baselines.hpp"
#include "noisewarp/error.hpp"
#include "noisewarp/flow.hpp"
#include "noisewarp/io_formats.hpp"
#include "noisewarp/noise_core.hpp"
#include "noisewarp/parallel.hpp"
#include "noisewarp/stats.hpp"
#include "noisewarp/validation.hpp"
#include "noisewarp/version.hpp"
#include "noisewarp/warp_engine.hpp"

namespace noisewarp::cli {
namespace {

namespace fs = std::filesystem;
using json = nlohmann::json;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string param_string(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}
template <std::integral T>
std::string param_string(T v) {
  return std::to_string(v);
}
std::string param_string(const std::string& v) { return v; }

// Registers flags on a subcommand and remembers how to record them in the
// manifest. Only flags given on the command line are recorded, so a replay
// passes exactly the original flag set.
class Params {
 public:
  explicit Params(CLI::App* app) : app_(app) {}

  template <class T>
  CLI::Option* option(const std::string& name, T& var, const std::string& help) {
    CLI::Option* o = app_->add_option("--" + name, var, help)->capture_default_str();
    getters_.push_back({name, o, [&var]() -> json { return param_string(var); }});
    return o;
  }

  CLI::Option* flag(const std::string& name, bool& var, const std::string& help) {
    CLI::Option* o = app_->add_flag("--" + name, var, help);
    getters_.push_back({name, o, [&var]() -> json { return var; }});
    return o;
  }

  // Recorded absolute so a manifest replays from any working directory.
  CLI::Option* path(const std::string& name, std::string& var, const std::string& help) {
    CLI::Option* o = app_->add_option("--" + name, var, help);
    getters_.push_back({name, o, [&var]() -> json {
                          return fs::absolute(var).lexically_normal().string();
                        }});
    return o;
  }

  json to_json() const {
    json j = json::object();
    for (const Getter& g : getters_) {
      if (g.option->count() > 0) j[g.name] = g.get();
    }
    return j;
  }

 private:
  struct Getter {
    std::string name;
    CLI::Option* option;
    std::function<json()> get;
  };
  CLI::App* app_;
  std::vector<Getter> getters_;
};

// Output directory plus the manifest describing it.
class Outputs {
 public:
  Outputs(fs::path dir, std::string subcommand, json params, RngKey key) : dir_(std::move(dir)) {
    fs::create_directories(dir_);
    manifest_.subcommand = std::move(subcommand);
    manifest_.params = std::move(params);
    manifest_.key = key;
    manifest_.tool_version = std::string(kVersion);
    manifest_.threads = num_threads();
  }

  const fs::path& dir() const noexcept { return dir_; }

  void input(const fs::path& path) {
    manifest_.inputs.push_back({fs::absolute(path).lexically_normal().string(),
                                hex64(file_checksum(path)), true});
  }

  void grid(const std::string& stem, const NoiseGrid& g, bool npy, bool png) {
    write_grid(g, dir_ / (stem + ".grid"));
    record(stem + ".grid");
    if (npy) {
      write_npy(g, dir_ / (stem + ".npy"));
      record(stem + ".npy");
    }
    if (png) {
      write_png_preview(g, dir_ / (stem + ".png"));
      record(stem + ".png");
    }
  }

  void mask(const std::string& name, const Mask& m) {
    Raster<std::uint8_t> img(m.width, m.height, 1);
    for (std::size_t i = 0; i < m.data.size(); ++i) img.data[i] = m.data[i] ? 255 : 0;
    write_png(img, dir_ / name);
    record(name);
  }

  void text(const std::string& name, const std::string& content, bool deterministic = true) {
    write_text_file(content, dir_ / name);
    record(name, deterministic);
  }

  void finish() const { write_manifest(manifest_, dir_ / "manifest.json"); }

  void record(const std::string& name, bool deterministic = true) {
    manifest_.outputs.push_back({name, hex64(file_checksum(dir_ / name)), deterministic});
  }

  fs::path dir_;
  RunManifest manifest_;
};

std::string frame_stem(std::size_t n) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "frame_%04zu", n);
  return buf;
}

std::string mask_name(std::size_t n) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "mask_%04zu.png", n);
  return buf;
}

std::vector<fs::path> list_files(const std::string& dir, const std::string& extension) {
  if (!fs::is_directory(dir)) throw IoError("not a directory: " + dir);
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == extension) {
      files.push_back(entry.path());
    }
  }
  // Frame order is the lexicographic order of the file names.
  std::sort(files.begin(), files.end(), [](const fs::path& a, const fs::path& b) {
    return a.filename().string() < b.filename().string();
  });
  if (files.empty()) throw DataError("no " + extension + " files in " + dir);
  return files;
}

std::vector<FlowField> load_flows(const std::string& dir, Outputs& outputs) {
  std::vector<FlowField> flows;
  for (const fs::path& p : list_files(dir, ".flo")) {
    outputs.input(p);
    flows.push_back(read_flo(p));
  }
  return flows;
}

NoiseGrid load_grid(const std::string& path, Outputs& outputs) {
  outputs.input(path);
  return read_grid(path);
}

Mask outside_domain_mask(const AccumulatedMap& acc) {
  Mask m(acc.width(), acc.height(), 1, 0);
  for (int y = 0; y < acc.height(); ++y) {
    for (int x = 0; x < acc.width(); ++x) {
      const Vec2 src = pixel_center({x, y}) + acc.field().at(x, y);
      const bool inside = src.x >= 0.0 && src.x <= acc.width() && src.y >= 0.0 &&
                          src.y <= acc.height();
      m.data[static_cast<std::size_t>(y) * static_cast<std::size_t>(acc.width()) +
             static_cast<std::size_t>(x)] = inside ? 0 : 1;
    }
  }
  return m;
}

// ---------------------------------------------------------------------------

struct GenOptions {
  int width = 0;
  int height = 0;
  int channels = 1;
  int count = 1;
  std::uint64_t seed = 0;
  bool npy = false;
  bool png = false;
};

int cmd_gen(const GenOptions& o, Outputs& out, std::ostream& log) {
  for (int i = 0; i < o.count; ++i) {
    const NoiseGrid g =
        sample_noise(o.width, o.height, o.channels, RngKey{o.seed, static_cast<std::uint64_t>(i)});
    char stem[32];
    std::snprintf(stem, sizeof stem, "noise_%04d", i);
    out.grid(stem, g, o.npy, o.png);
  }
  out.finish();
  log << "gen: wrote " << o.count << " grid(s) to " << out.dir().string() << "\n";
  return kExitOk;
}

struct UpsampleOptions {
  std::string in;
  int factor = 0;
  std::uint64_t seed = 0;
  bool npy = false;
  bool png = false;
};

int cmd_upsample(const UpsampleOptions& o, Outputs& out, std::ostream& log) {
  if (exact_log2(o.factor) < 1) {
    throw UsageError("--factor must be a power of two >= 2, got " + std::to_string(o.factor));
  }
  const NoiseGrid g = load_grid(o.in, out);
  const NoiseGrid up = upsample_conditional(g, o.factor, RngKey{o.seed, 0});
  out.grid("upsampled", up, o.npy, o.png);
  out.finish();
  log << "upsample: level " << g.level() << " -> " << up.level() << "\n";
  return kExitOk;
}

struct WarpOptions {
  std::string in;
  std::string flows;
  int k = 3;
  int s = 4;
  std::uint64_t seed = 0;
  bool npy = false;
  bool png = false;
};

int cmd_warp(const WarpOptions& o, Outputs& out, std::ostream& log) {
  const NoiseGrid g0 = load_grid(o.in, out);
  const std::vector<FlowField> flows = load_flows(o.flows, out);
  WarpConfig cfg;
  cfg.k = o.k;
  cfg.s = o.s;
  cfg.key = RngKey{o.seed, 0};
  const std::vector<WarpResult> frames = warp_sequence(g0, flows, cfg);

  std::ostringstream summary;
  summary << "frame,undefined_ratio,anchor,previous,random\n";
  for (std::size_t n = 0; n < frames.size(); ++n) {
    const WarpResult& r = frames[n];
    out.grid(frame_stem(n), r.noise, o.npy, o.png);
    out.mask(mask_name(n), r.undefined_mask);
    std::size_t counts[3] = {0, 0, 0};
    for (FillSource f : r.fill_source) ++counts[static_cast<int>(f)];
    summary << n << ',' << param_string(r.undefined_ratio()) << ',' << counts[0] << ','
            << counts[1] << ',' << counts[2] << '\n';
  }
  out.text("fill_summary.csv", summary.str());
  out.finish();
  log << "warp: wrote " << frames.size() << " frames to " << out.dir().string() << "\n";
  return kExitOk;
}

struct BaselineOptions {
  std::string scheme;
  std::string in;
  std::string flows;
  std::string frames;
  int width = 0;
  int height = 0;
  int channels = 1;
  int count = 0;
  double alpha = 1.0;
  double threshold = 0.1;
  std::uint64_t seed = 0;
  bool npy = false;
  bool png = false;
};

bool is_interp_scheme(const std::string& name) {
  try {
    parse_interp_scheme(name);
    return true;
  } catch (const InvalidArgumentError&) {
    return false;
  }
}

int cmd_baseline(const BaselineOptions& o, Outputs& out, std::ostream& log) {
  std::vector<NoiseGrid> grids;
  std::vector<Mask> masks;

  if (is_interp_scheme(o.scheme)) {
    if (o.in.empty() || o.flows.empty()) {
      throw UsageError("interpolation baselines need --in and --flows");
    }
    const InterpScheme scheme = parse_interp_scheme(o.scheme);
    const NoiseGrid g0 = load_grid(o.in, out);
    const std::vector<FlowField> flows = load_flows(o.flows, out);
    grids.push_back(g0);
    masks.emplace_back(g0.width(), g0.height(), 1, 0);
    for (const AccumulatedMap& acc : accumulate(flows)) {
      grids.push_back(warp_interp(g0, acc, scheme));
      masks.push_back(outside_domain_mask(acc));
    }
  } else {
    PriorSpec spec;
    try {
      spec.kind = parse_prior_kind(o.scheme);
    } catch (const InvalidArgumentError& e) {
      throw UsageError(std::string(e.what()) +
                       " (expected bilinear, bicubic, nearest, root_bilinear, random, fixed, "
                       "pyoco_mixed, pyoco_progressive, residual)");
    }
    spec.alpha = o.alpha;
    spec.threshold = o.threshold;
    spec.key = RngKey{o.seed, 0};
    try {
      spec.validate();
    } catch (const InvalidArgumentError& e) {
      throw UsageError(e.what());
    }

    std::vector<Image> images;
    if (!o.frames.empty()) {
      for (const fs::path& p : list_files(o.frames, ".png")) {
        out.input(p);
        images.push_back(read_png(p));
      }
    }

    GridShape shape{o.width, o.height, o.channels};
    if (!o.in.empty()) {
      const NoiseGrid g = load_grid(o.in, out);
      shape = GridShape{g.width(), g.height(), g.channels()};
    } else if (o.width < 1 || o.height < 1) {
      // Fall back to the frame size.
      if (images.empty()) throw UsageError("prior baselines need --in, --width/--height or --frames");
      shape.width = images.front().width;
      shape.height = images.front().height;
    }
    int n_frames = o.count;
    if (n_frames == 0) {
      if (!o.flows.empty()) {
        n_frames = static_cast<int>(list_files(o.flows, ".flo").size()) + 1;
      } else if (!images.empty()) {
        n_frames = static_cast<int>(images.size());
      } else {
        throw UsageError("set --count, --flows or --frames to fix the number of frames");
      }
    }
    if (spec.kind == PriorKind::kResidual && images.empty()) {
      throw UsageError("the residual prior needs --frames");
    }
    std::optional<std::span<const Image>> frame_span;
    if (!images.empty()) frame_span = std::span<const Image>(images);
    grids = generate_prior(spec, n_frames, shape, frame_span);
    masks.assign(grids.size(), Mask(shape.width, shape.height, 1, 0));
  }

  for (std::size_t n = 0; n < grids.size(); ++n) {
    out.grid(frame_stem(n), grids[n], o.npy, o.png);
    out.mask(mask_name(n), masks[n]);
  }
  out.finish();
  log << "baseline " << o.scheme << ": wrote " << grids.size() << " frames\n";
  return kExitOk;
}

struct ValidateOptions {
  std::string method = "intnoise";
  std::uint64_t trials = 100000;
  int k = 3;
  int s = 4;
  int size = 8;
  std::uint64_t seed = 0;
};

WarpMethod method_flag(const std::string& name) {
  try {
    return parse_warp_method(name);
  } catch (const InvalidArgumentError& e) {
    throw UsageError(e.what());
  }
}

int cmd_validate(const ValidateOptions& o, Outputs& out, std::ostream& log) {
  ValidationOptions v;
  v.method = method_flag(o.method);
  v.trials = o.trials;
  v.k = o.k;
  v.s = o.s;
  v.size = o.size;
  v.key = RngKey{o.seed, 0};
  const StatsReport report = run_validation(v);
  out.text("report.json", to_json(report) + "\n");
  out.finish();

  for (const CheckResult& c : report.checks) {
    log << (c.passed ? "PASS " : "FAIL ") << c.name << ": worst " << c.value << " vs "
        << c.expected << " (tol " << c.tolerance << "), " << c.failed << "/" << c.total
        << " failed\n";
  }
  if (!report.all_passed()) {
    log << "validate " << o.method << ": FAILED\n";
    return kExitValidation;
  }
  log << "validate " << o.method << ": all checks passed\n";
  return kExitOk;
}

struct CovarianceOptions {
  std::string method = "intnoise";
  double shift = 3.6;
  std::uint64_t trials = 100000;
  int k = 3;
  int s = 4;
  int patch = 4;
  std::uint64_t seed = 0;
};

int cmd_covariance(const CovarianceOptions& o, Outputs& out, std::ostream& log) {
  const CovarianceExperiment exp = run_covariance_experiment(
      method_flag(o.method), o.shift, o.trials, o.k, o.s, o.patch, RngKey{o.seed, 0});
  out.text("covariance.json", to_json(exp.report) + "\n");

  std::ostringstream cov;
  cov << "row,col,row_x,row_y,col_x,col_y,value,standard_error\n";
  for (int i = 0; i < exp.warped_patch.size(); ++i) {
    for (int j = 0; j < exp.warped_patch.size(); ++j) {
      const PixelCoord a = exp.warped_patch.pixel(i);
      const PixelCoord b = exp.warped_patch.pixel(j);
      cov << i << ',' << j << ',' << a.x << ',' << a.y << ',' << b.x << ',' << b.y << ','
          << param_string(exp.cov.value(i, j)) << ','
          << param_string(exp.cov.standard_error(i, j)) << '\n';
    }
  }
  out.text("covariance.csv", cov.str());

  std::ostringstream cross;
  cross << "row,col,warped_x,warped_y,anchor_x,anchor_y,value,standard_error,oracle\n";
  for (int i = 0; i < exp.warped_patch.size(); ++i) {
    for (int j = 0; j < exp.anchor_patch.size(); ++j) {
      const PixelCoord a = exp.warped_patch.pixel(i);
      const PixelCoord b = exp.anchor_patch.pixel(j);
      cross << i << ',' << j << ',' << a.x << ',' << a.y << ',' << b.x << ',' << b.y << ','
            << param_string(exp.cross.value(i, j)) << ','
            << param_string(exp.cross.standard_error(i, j)) << ','
            << param_string(exp.oracle(i, j)) << '\n';
    }
  }
  out.text("cross_covariance.csv", cross.str());
  out.finish();
  log << "covariance " << o.method << ": " << o.trials << " trials, "
      << (exp.report.all_passed() ? "matches" : "deviates from") << " the oracle\n";
  return kExitOk;
}

// Synthetic per-frame flow shared by ablate_k and bench.
struct SequenceOptions {
  std::string flows;
  std::string flow = "swirl";
  int size = 256;
  int frames = 24;
  double dx = 1.5;
  double dy = 0.0;
  double angle = 0.12;
  double radius = 0.0;  // 0: a quarter of the size
  double factor = 1.05;
};

void add_sequence_flags(Params& p, SequenceOptions& o) {
  auto* flows = p.path("flows", o.flows, "directory of .flo files (replaces the synthetic flow)");
  auto* flow = p.option("flow", o.flow, "synthetic flow: translate, rotate, swirl, zoom");
  auto* size = p.option("size", o.size, "synthetic grid size")->check(CLI::Range(4, 4096));
  auto* frames = p.option("frames", o.frames, "synthetic frame count")->check(CLI::Range(1, 10000));
  flows->excludes(flow)->excludes(size)->excludes(frames);
  p.option("dx", o.dx, "translate: x shift per frame");
  p.option("dy", o.dy, "translate: y shift per frame");
  p.option("angle", o.angle, "rotate/swirl: angle per frame in radians");
  p.option("radius", o.radius, "swirl: falloff radius (0 = size / 4)");
  p.option("factor", o.factor, "zoom: magnification per frame")->check(CLI::PositiveNumber);
}

std::vector<FlowField> sequence_flows(const SequenceOptions& o, Outputs& out) {
  if (!o.flows.empty()) return load_flows(o.flows, out);
  FlowKind kind;
  try {
    kind = parse_flow_kind(o.flow);
  } catch (const InvalidArgumentError& e) {
    throw UsageError(e.what());
  }
  SyntheticFlowParams params;
  params.dx = o.dx;
  params.dy = o.dy;
  params.angle = o.angle;
  params.radius = o.radius > 0.0 ? o.radius : o.size / 4.0;
  params.factor = o.factor;
  return std::vector<FlowField>(static_cast<std::size_t>(o.frames),
                                make_synthetic_flow(kind, params, o.size, o.size));
}

struct MakeFlowsOptions {
  SequenceOptions seq;
  int width = 0;  // 0: --size
  int height = 0;
};

int cmd_make_flows(const MakeFlowsOptions& o, Outputs& out, std::ostream& log) {
  FlowKind kind;
  try {
    kind = parse_flow_kind(o.seq.flow);
  } catch (const InvalidArgumentError& e) {
    throw UsageError(e.what());
  }
  const int w = o.width > 0 ? o.width : o.seq.size;
  const int h = o.height > 0 ? o.height : o.seq.size;
  SyntheticFlowParams params;
  params.dx = o.seq.dx;
  params.dy = o.seq.dy;
  params.angle = o.seq.angle;
  params.radius = o.seq.radius > 0.0 ? o.seq.radius : std::min(w, h) / 4.0;
  params.factor = o.seq.factor;
  const std::vector<FlowField> flows(static_cast<std::size_t>(o.seq.frames),
                                     make_synthetic_flow(kind, params, w, h));
  for (std::size_t n = 0; n < flows.size(); ++n) {
    char name[32];
    std::snprintf(name, sizeof name, "flow_%04zu.flo", n + 1);
    write_flo(flows[n], out.dir() / name);
    out.record(name);
  }
  out.finish();
  log << "make_flows: wrote " << flows.size() << " flows\n";
  return kExitOk;
}

struct AblateOptions {
  SequenceOptions seq;
  int kmin = 0;
  int kmax = 4;
  int s = 4;
};

int cmd_ablate_k(const AblateOptions& o, Outputs& out, std::ostream& log) {
  if (o.kmin > o.kmax) throw UsageError("--kmin must not exceed --kmax");
  const std::vector<FlowField> flows = sequence_flows(o.seq, out);
  const std::vector<AccumulatedMap> maps = accumulate(flows);

  std::ostringstream csv;
  csv << "k,frame,undefined_ratio\n";
  for (int k = o.kmin; k <= o.kmax; ++k) {
    double last = 0.0;
    for (std::size_t n = 0; n < maps.size(); ++n) {
      const auto counts = build_coverage(maps[n].field(), k, o.s).coverage_counts();
      const auto undefined = std::count(counts.begin(), counts.end(), 0);
      last = static_cast<double>(undefined) / static_cast<double>(counts.size());
      csv << k << ',' << n + 1 << ',' << param_string(last) << '\n';
    }
    log << "ablate_k: k=" << k << " undefined ratio at frame " << maps.size() << " = " << last
        << "\n";
  }
  out.text("ablate_k.csv", csv.str());
  out.finish();
  return kExitOk;
}

struct BenchOptions {
  SequenceOptions seq;
  int kmin = 0;
  int kmax = 4;
  int smin = 1;
  int smax = 4;
  int channels = 1;
  int repeat = 3;
  std::uint64_t seed = 0;
};

int cmd_bench(const BenchOptions& o, Outputs& out, std::ostream& log) {
  if (o.kmin > o.kmax || o.smin > o.smax) throw UsageError("empty k or s range");
  const std::vector<FlowField> flows = sequence_flows(o.seq, out);
  const NoiseGrid g0 =
      sample_noise(flows.front().width(), flows.front().height(), o.channels, RngKey{o.seed, 0});

  std::ostringstream timing;
  std::ostringstream digest;
  timing << "k,s,frames,width,height,threads,repeats,wall_ms_total,cpu_ms_total,wall_ms_per_frame,"
            "cpu_ms_per_frame,output_digest\n";
  digest << "k,s,frames,output_digest\n";
  for (int k = o.kmin; k <= o.kmax; ++k) {
    for (int s = o.smin; s <= o.smax; ++s) {
      WarpConfig cfg;
      cfg.k = k;
      cfg.s = s;
      cfg.key = RngKey{o.seed, 0};
      // Minimum over repeats: the least disturbed run of identical work.
      double wall_ms = HUGE_VAL;
      double cpu_ms = HUGE_VAL;
      std::optional<std::uint64_t> digest_value;
      for (int rep = 0; rep < o.repeat; ++rep) {
        const auto wall0 = std::chrono::steady_clock::now();
        const std::clock_t cpu0 = std::clock();
        const std::vector<WarpResult> frames = warp_sequence(g0, flows, cfg);
        const std::clock_t cpu1 = std::clock();
        const auto wall1 = std::chrono::steady_clock::now();
        wall_ms = std::min(wall_ms, std::chrono::duration<double, std::milli>(wall1 - wall0).count());
        cpu_ms = std::min(cpu_ms, 1000.0 * static_cast<double>(cpu1 - cpu0) / CLOCKS_PER_SEC);
        std::uint64_t d = fnv1a64({});
        for (const WarpResult& r : frames) d = fnv1a64(encode_grid(r.noise), d);
        if (digest_value && *digest_value != d) {
          throw DataError("bench: repeated warp_sequence runs produced different outputs");
        }
        digest_value = d;
      }
      const std::uint64_t h = *digest_value;
      const double n = static_cast<double>(flows.size());
      timing << k << ',' << s << ',' << flows.size() << ',' << g0.width() << ',' << g0.height()
             << ',' << num_threads() << ',' << o.repeat << ',' << wall_ms << ',' << cpu_ms << ',' << wall_ms / n
             << ',' << cpu_ms / n << ',' << hex64(h) << '\n';
      digest << k << ',' << s << ',' << flows.size() << ',' << hex64(h) << '\n';
      log << "bench: k=" << k << " s=" << s << " wall " << wall_ms / n << " ms/frame, cpu "
          << cpu_ms / n << " ms/frame\n";
    }
  }
  out.text("bench.csv", timing.str(), false);
  out.text("bench_digest.csv", digest.str());
  out.finish();
  return kExitOk;
}

struct ReplayOptions {
  std::string manifest;
};

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"noisewarp: distribution-preserving Gaussian noise warping"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);
  int threads = 0;
  app.add_option("--threads", threads, "worker threads (default: all cores)")
      ->check(CLI::Range(1, 1024));

  struct Entry {
    CLI::App* app;
    std::unique_ptr<Params> params;
    std::string out_dir;
    std::function<int(Outputs&)> handler;
    const std::uint64_t* seed = nullptr;
  };
  std::vector<std::unique_ptr<Entry>> entries;
  auto add = [&](const std::string& name, const std::string& help) -> Entry& {
    auto e = std::make_unique<Entry>();
    e->app = app.add_subcommand(name, help);
    e->params = std::make_unique<Params>(e->app);
    e->app->add_option("--out", e->out_dir, "output directory")->required();
    entries.push_back(std::move(e));
    return *entries.back();
  };

  GenOptions gen;
  {
    Entry& e = add("gen", "sample i.i.d. standard normal grids");
    e.params->option("width", gen.width, "grid width")->required()->check(CLI::Range(1, 1 << 16));
    e.params->option("height", gen.height, "grid height")->required()->check(CLI::Range(1, 1 << 16));
    e.params->option("channels", gen.channels, "channels")->check(CLI::Range(1, 64));
    e.params->option("count", gen.count, "number of grids")->check(CLI::Range(1, 100000));
    e.params->option("seed", gen.seed, "random seed");
    e.params->flag("npy", gen.npy, "also write .npy");
    e.params->flag("png", gen.png, "also write .png previews");
    e.seed = &gen.seed;
    e.handler = [&](Outputs& o) { return cmd_gen(gen, o, out); };
  }
  UpsampleOptions up;
  {
    Entry& e = add("upsample", "conditional upsampling by a power-of-two factor");
    e.params->path("in", up.in, "input .grid")->required();
    e.params->option("factor", up.factor, "upsampling factor (power of two)")->required();
    e.params->option("seed", up.seed, "random seed");
    e.params->flag("npy", up.npy, "also write .npy");
    e.params->flag("png", up.png, "also write .png previews");
    e.seed = &up.seed;
    e.handler = [&](Outputs& o) { return cmd_upsample(up, o, out); };
  }
  WarpOptions warp;
  {
    Entry& e = add("warp", "warp a noise grid through a sequence of .flo flows");
    e.params->path("in", warp.in, "level-0 .grid")->required();
    e.params->path("flows", warp.flows, "directory of backward .flo flows")->required();
    e.params->option("k", warp.k, "upsampling level")->check(CLI::Range(0, 8));
    e.params->option("s", warp.s, "contour subdivisions per edge")->check(CLI::Range(1, 64));
    e.params->option("seed", warp.seed, "random seed");
    e.params->flag("npy", warp.npy, "also write .npy");
    e.params->flag("png", warp.png, "also write .png previews");
    e.seed = &warp.seed;
    e.handler = [&](Outputs& o) { return cmd_warp(warp, o, out); };
  }
  BaselineOptions base;
  {
    Entry& e = add("baseline", "interpolation warps and non-warping noise priors");
    e.params->option("scheme", base.scheme, "bilinear, bicubic, nearest, root_bilinear, random, "
                                             "fixed, pyoco_mixed, pyoco_progressive, residual")
        ->required();
    auto* in = e.params->path("in", base.in, "level-0 .grid");
    e.params->path("flows", base.flows, "directory of backward .flo flows");
    e.params->path("frames", base.frames, "directory of .png video frames (residual)");
    auto* w = e.params->option("width", base.width, "prior width without --in")
                  ->check(CLI::Range(0, 1 << 16));
    auto* h = e.params->option("height", base.height, "prior height without --in")
                  ->check(CLI::Range(0, 1 << 16));
    auto* c = e.params->option("channels", base.channels, "prior channels without --in")
                  ->check(CLI::Range(1, 64));
    in->excludes(w)->excludes(h)->excludes(c);
    e.params->option("count", base.count, "prior frame count (0: from flows or frames)")
        ->check(CLI::Range(0, 100000));
    e.params->option("alpha", base.alpha, "PYoCo correlation strength");
    e.params->option("threshold", base.threshold, "residual change threshold");
    e.params->option("seed", base.seed, "random seed");
    e.params->flag("npy", base.npy, "also write .npy");
    e.params->flag("png", base.png, "also write .png previews");
    e.seed = &base.seed;
    e.handler = [&](Outputs& o) { return cmd_baseline(base, o, out); };
  }
  ValidateOptions val;
  {
    Entry& e = add("validate", "statistical suite; exit 3 on any failed check");
    e.params->option("method", val.method, "intnoise, bilinear, bicubic, nearest, root_bilinear");
    e.params->option("trials", val.trials, "Monte-Carlo trials")
        ->check(CLI::Range(std::uint64_t{2}, std::uint64_t{100000000}));
    e.params->option("k", val.k, "upsampling level")->check(CLI::Range(0, 8));
    e.params->option("s", val.s, "contour subdivisions per edge")->check(CLI::Range(1, 64));
    e.params->option("size", val.size, "grid size of the deformation scenarios")
        ->check(CLI::Range(6, 64));
    e.params->option("seed", val.seed, "random seed");
    e.seed = &val.seed;
    e.handler = [&](Outputs& o) { return cmd_validate(val, o, out); };
  }
  CovarianceOptions cov;
  {
    Entry& e = add("covariance", "covariance and cross-covariance under a translation");
    e.params->option("method", cov.method, "intnoise, bilinear, bicubic, nearest, root_bilinear");
    e.params->option("shift", cov.shift, "horizontal translation in pixels")
        ->check(CLI::Range(-64.0, 64.0));
    e.params->option("trials", cov.trials, "Monte-Carlo trials")
        ->check(CLI::Range(std::uint64_t{2}, std::uint64_t{100000000}));
    e.params->option("k", cov.k, "upsampling level")->check(CLI::Range(0, 8));
    e.params->option("s", cov.s, "contour subdivisions per edge")->check(CLI::Range(1, 64));
    e.params->option("patch", cov.patch, "patch size")->check(CLI::Range(1, 16));
    e.params->option("seed", cov.seed, "random seed");
    e.seed = &cov.seed;
    e.handler = [&](Outputs& o) { return cmd_covariance(cov, o, out); };
  }
  MakeFlowsOptions mk;
  {
    Entry& e = add("make_flows", "write a synthetic backward flow sequence as .flo files");
    e.params->option("size", mk.seq.size, "grid size when width/height unset")
        ->check(CLI::Range(1, 1 << 16));
    e.params->option("width", mk.width, "grid width")->check(CLI::Range(0, 1 << 16));
    e.params->option("height", mk.height, "grid height")->check(CLI::Range(0, 1 << 16));
    e.params->option("frames", mk.seq.frames, "number of flows")->check(CLI::Range(1, 10000));
    e.params->option("flow", mk.seq.flow, "translate, rotate, swirl, zoom");
    e.params->option("dx", mk.seq.dx, "translate: x shift per frame");
    e.params->option("dy", mk.seq.dy, "translate: y shift per frame");
    e.params->option("angle", mk.seq.angle, "rotate/swirl: angle per frame in radians");
    e.params->option("radius", mk.seq.radius, "swirl: falloff radius (0 = size / 4)");
    e.params->option("factor", mk.seq.factor, "zoom: magnification per frame")
        ->check(CLI::PositiveNumber);
    e.handler = [&](Outputs& o) { return cmd_make_flows(mk, o, out); };
  }
  AblateOptions abl;
  {
    Entry& e = add("ablate_k", "undefined-pixel ratio per (k, frame)");
    add_sequence_flags(*e.params, abl.seq);
    e.params->option("kmin", abl.kmin, "smallest k")->check(CLI::Range(0, 8));
    e.params->option("kmax", abl.kmax, "largest k")->check(CLI::Range(0, 8));
    e.params->option("s", abl.s, "contour subdivisions per edge")->check(CLI::Range(1, 64));
    e.handler = [&](Outputs& o) { return cmd_ablate_k(abl, o, out); };
  }
  BenchOptions bench;
  {
    Entry& e = add("bench", "wall and CPU time of warp_sequence over (k, s)");
    add_sequence_flags(*e.params, bench.seq);
    e.params->option("kmin", bench.kmin, "smallest k")->check(CLI::Range(0, 8));
    e.params->option("kmax", bench.kmax, "largest k")->check(CLI::Range(0, 8));
    e.params->option("smin", bench.smin, "smallest s")->check(CLI::Range(1, 64));
    e.params->option("smax", bench.smax, "largest s")->check(CLI::Range(1, 64));
    e.params->option("channels", bench.channels, "noise channels")->check(CLI::Range(1, 64));
    e.params->option("repeat", bench.repeat, "timed runs per (k, s); the minimum is reported")
        ->check(CLI::Range(1, 100));
    e.params->option("seed", bench.seed, "random seed");
    e.seed = &bench.seed;
    e.handler = [&](Outputs& o) { return cmd_bench(bench, o, out); };
  }

  ReplayOptions replay;
  std::string replay_out;
  CLI::App* replay_app =
      app.add_subcommand("replay", "re-run a manifest and compare outputs bit for bit");
  replay_app->add_option("--manifest", replay.manifest, "manifest.json to replay")->required();
  replay_app->add_option("--out", replay_out, "output directory")->required();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitUsage;
  }

  if (threads > 0) set_num_threads(threads);

  try {
    if (replay_app->parsed()) {
      const RunManifest recorded = read_manifest(replay.manifest);
      for (const FileRecord& in : recorded.inputs) {
        if (hex64(file_checksum(in.path)) != in.checksum) {
          throw DataError("input changed since the manifest was written: " + in.path);
        }
      }
      if (recorded.tool_version != kVersion) {
        err << "replay: manifest written by version " << recorded.tool_version << ", running "
            << kVersion << "\n";
      }
      std::vector<std::string> replay_args;
      if (threads > 0) replay_args = {"--threads", std::to_string(threads)};
      for (std::string& a : replay_arguments(recorded, replay_out)) replay_args.push_back(std::move(a));
      const int rc = run(replay_args, out, err);
      if (rc != kExitOk && rc != kExitValidation) return rc;

      const RunManifest fresh = read_manifest(fs::path(replay_out) / "manifest.json");
      std::size_t compared = 0;
      std::size_t mismatched = 0;
      for (const FileRecord& want : recorded.outputs) {
        if (!want.deterministic) continue;
        const auto got = std::find_if(fresh.outputs.begin(), fresh.outputs.end(),
                                      [&](const FileRecord& r) { return r.path == want.path; });
        ++compared;
        if (got == fresh.outputs.end() || got->checksum != want.checksum) {
          ++mismatched;
          err << "replay: output differs: " << want.path << "\n";
        }
      }
      if (fresh.outputs.size() != recorded.outputs.size()) {
        ++mismatched;
        err << "replay: output count differs (" << fresh.outputs.size() << " vs "
            << recorded.outputs.size() << ")\n";
      }
      out << "replay: " << compared - std::min(compared, mismatched) << "/" << compared
          << " outputs bit-identical\n";
      return mismatched == 0 ? rc : kExitValidation;
    }

    for (const auto& e : entries) {
      if (!e->app->parsed()) continue;
      Outputs outputs(e->out_dir, e->app->get_name(), e->params->to_json(), RngKey{e->seed ? *e->seed : 0, 0});
      return e->handler(outputs);
    }
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const Error& e) {
    err << to_string(e.kind()) << ": " << e.what() << "\n";
    return kExitData;
  } catch (const fs::filesystem_error& e) {
    err << "io-error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitData;
  }
  return kExitUsage;
}

}  // namespace noisewarp::cli
