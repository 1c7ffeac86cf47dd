#include "noisewarp/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include <json.hpp>

#include "noisewarp/error.hpp"
#include "noisewarp/resample.hpp"

namespace noisewarp {
namespace {

using json = nlohmann::json;

void check_ensemble(std::span<const NoiseGrid> samples, const char* what) {
  if (samples.size() < 2) {
    throw InvalidArgumentError(std::string(what) + " needs at least 2 samples");
  }
  for (const NoiseGrid& g : samples) {
    if (!g.same_shape(samples.front())) {
      throw InvalidArgumentError(std::string(what) + ": samples differ in shape");
    }
  }
}

void check_patch(const NoiseGrid& g, const Patch& patch) {
  if (patch.width < 1 || patch.height < 1 || patch.x < 0 || patch.y < 0 ||
      patch.x + patch.width > g.data_width() || patch.y + patch.height > g.data_height() ||
      patch.channel < 0 || patch.channel >= g.channels()) {
    throw InvalidArgumentError("patch lies outside the grid");
  }
}

// One row per sample, one column per patch pixel, column-centered.
Eigen::MatrixXd centered_patch_matrix(std::span<const NoiseGrid> samples, const Patch& patch) {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(samples.size()), patch.size());
  for (std::size_t s = 0; s < samples.size(); ++s) {
    for (int i = 0; i < patch.size(); ++i) {
      const PixelCoord p = patch.pixel(i);
      m(static_cast<Eigen::Index>(s), i) = samples[s].at(p.x, p.y, patch.channel);
    }
  }
  m.rowwise() -= m.colwise().mean();
  return m;
}

CovarianceEstimate product_moments(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  const double count = static_cast<double>(a.rows());
  CovarianceEstimate est;
  est.value = a.transpose() * b / (count - 1.0);
  // SE of the mean of d_i d_j: sqrt((E[(d_i d_j)^2] - E[d_i d_j]^2) / M).
  const Eigen::MatrixXd mean_product = a.transpose() * b / count;
  const Eigen::MatrixXd mean_sq =
      a.cwiseProduct(a).transpose() * b.cwiseProduct(b) / count;
  est.standard_error =
      ((mean_sq - mean_product.cwiseProduct(mean_product)).cwiseMax(0.0) / count).cwiseSqrt();
  return est;
}

double standard_normal_cdf(double x) noexcept {
  return 0.5 * std::erfc(-x / std::numbers::sqrt2);
}

json matrix_to_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXd matrix_from_json(const json& j) {
  if (!j.is_array() || j.empty()) return {};
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols = static_cast<Eigen::Index>(j.front().size());
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const json& row = j.at(static_cast<std::size_t>(r));
    if (static_cast<Eigen::Index>(row.size()) != cols) {
      throw FormatError("stats report: ragged matrix");
    }
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = row.at(static_cast<std::size_t>(c)).get<double>();
  }
  return m;
}

}  // namespace

Patch center_patch(int grid_width, int grid_height, int size) {
  return Patch{(grid_width - size) / 2, (grid_height - size) / 2, size, size, 0};
}

bool StatsReport::all_passed() const noexcept {
  return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.passed; });
}

std::string to_json(const StatsReport& report, int indent) {
  json j;
  j["schema"] = "noisewarp.stats_report";
  j["version"] = StatsReport::kSchemaVersion;
  j["sample_count"] = report.sample_count;
  j["shape"] = {{"width", report.width}, {"height", report.height}, {"channels", report.channels}};
  j["mean"] = report.mean;
  j["variance"] = report.variance;
  j["variance_standard_error"] = report.variance_standard_error;
  if (report.patch) {
    const Patch& p = *report.patch;
    j["patch"] = {{"x", p.x}, {"y", p.y}, {"width", p.width}, {"height", p.height},
                  {"channel", p.channel}};
  } else {
    j["patch"] = nullptr;
  }
  j["covariance"] = matrix_to_json(report.covariance);
  j["cross_covariance"] = matrix_to_json(report.cross_covariance);
  j["ks"] = {{"statistic", report.ks_statistic}, {"p_value", report.ks_p_value}};
  json checks = json::array();
  for (const CheckResult& c : report.checks) {
    checks.push_back({{"name", c.name}, {"value", c.value}, {"expected", c.expected},
                      {"tolerance", c.tolerance}, {"passed", c.passed},
                      {"failed", c.failed}, {"total", c.total}});
  }
  j["checks"] = std::move(checks);
  j["passed"] = report.all_passed();
  return j.dump(indent);
}

StatsReport stats_report_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw FormatError(std::string("stats report is not valid JSON: ") + e.what());
  }
  if (j.value("schema", "") != "noisewarp.stats_report") {
    throw FormatError("not a noisewarp stats report");
  }
  if (j.value("version", 0) != StatsReport::kSchemaVersion) {
    throw FormatError("unsupported stats report version");
  }
  StatsReport r;
  try {
    r.sample_count = j.at("sample_count").get<std::uint64_t>();
    r.width = j.at("shape").at("width").get<int>();
    r.height = j.at("shape").at("height").get<int>();
    r.channels = j.at("shape").at("channels").get<int>();
    r.mean = j.at("mean").get<std::vector<double>>();
    r.variance = j.at("variance").get<std::vector<double>>();
    r.variance_standard_error = j.at("variance_standard_error").get<std::vector<double>>();
    if (!j.at("patch").is_null()) {
      const json& p = j.at("patch");
      r.patch = Patch{p.at("x").get<int>(), p.at("y").get<int>(), p.at("width").get<int>(),
                      p.at("height").get<int>(), p.at("channel").get<int>()};
    }
    r.covariance = matrix_from_json(j.at("covariance"));
    r.cross_covariance = matrix_from_json(j.at("cross_covariance"));
    r.ks_statistic = j.at("ks").at("statistic").get<double>();
    r.ks_p_value = j.at("ks").at("p_value").get<double>();
    for (const json& c : j.at("checks")) {
      r.checks.push_back({c.at("name").get<std::string>(), c.at("value").get<double>(),
                          c.at("expected").get<double>(), c.at("tolerance").get<double>(),
                          c.at("passed").get<bool>(), c.value("failed", std::uint64_t{0}),
                          c.value("total", std::uint64_t{1})});
    }
  } catch (const json::exception& e) {
    throw FormatError(std::string("malformed stats report: ") + e.what());
  }
  return r;
}

StatsReport ensemble_moments(std::span<const NoiseGrid> samples) {
  check_ensemble(samples, "ensemble_moments");
  const std::size_t n = samples.front().element_count();
  const double count = static_cast<double>(samples.size());

  std::vector<double> mean(n, 0.0);
  for (const NoiseGrid& g : samples) {
    const auto d = g.data();
    for (std::size_t i = 0; i < n; ++i) mean[i] += d[i];
  }
  for (double& m : mean) m /= count;

  std::vector<double> m2(n, 0.0), m4(n, 0.0);
  for (const NoiseGrid& g : samples) {
    const auto d = g.data();
    for (std::size_t i = 0; i < n; ++i) {
      const double dev = d[i] - mean[i];
      const double sq = dev * dev;
      m2[i] += sq;
      m4[i] += sq * sq;
    }
  }

  StatsReport report;
  report.sample_count = samples.size();
  report.width = samples.front().data_width();
  report.height = samples.front().data_height();
  report.channels = samples.front().channels();
  report.mean = std::move(mean);
  report.variance.resize(n);
  report.variance_standard_error.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    report.variance[i] = m2[i] / (count - 1.0);
    const double mean_sq = m2[i] / count;
    const double spread = std::max(0.0, m4[i] / count - mean_sq * mean_sq);
    report.variance_standard_error[i] = std::sqrt(spread / count);
  }
  return report;
}

CovarianceEstimate covariance(std::span<const NoiseGrid> samples, const Patch& patch) {
  check_ensemble(samples, "covariance");
  check_patch(samples.front(), patch);
  const Eigen::MatrixXd m = centered_patch_matrix(samples, patch);
  CovarianceEstimate est = product_moments(m, m);
  // Exact symmetry regardless of evaluation order inside the product.
  est.value = 0.5 * (est.value + est.value.transpose()).eval();
  return est;
}

CovarianceEstimate cross_covariance(std::span<const NoiseGrid> a, std::span<const NoiseGrid> b,
                                    const Patch& patch_a, const Patch& patch_b) {
  if (a.size() != b.size()) {
    throw InvalidArgumentError("cross_covariance: ensembles have " + std::to_string(a.size()) +
                               " and " + std::to_string(b.size()) + " samples");
  }
  check_ensemble(a, "cross_covariance");
  check_ensemble(b, "cross_covariance");
  check_patch(a.front(), patch_a);
  check_patch(b.front(), patch_b);
  return product_moments(centered_patch_matrix(a, patch_a), centered_patch_matrix(b, patch_b));
}

BackwardMap backward_map(const FlowField& flow) {
  return [flow](Vec2 p) { return p + sample_flow(flow, p); };
}

BackwardMap translation_map(double dx, double dy) {
  return [dx, dy](Vec2 p) { return Vec2{p.x + dx, p.y + dy}; };
}

double OverlapEstimate::covariance() const noexcept {
  if (preimage_area <= 0.0) return 0.0;
  return intersection_area / std::sqrt(preimage_area);
}

OverlapEstimate overlap_oracle(const BackwardMap& map, PixelCoord p, PixelCoord q,
                               int resolution) {
  if (resolution < 1) throw InvalidArgumentError("overlap_oracle: resolution must be >= 1");
  const double step = 1.0 / resolution;
  const double h = 0.25 * step;
  const double cell = step * step;
  OverlapEstimate est;
  for (int j = 0; j < resolution; ++j) {
    for (int i = 0; i < resolution; ++i) {
      const Vec2 x{p.x + (i + 0.5) * step, p.y + (j + 0.5) * step};
      const Vec2 y = map(x);
      const Vec2 ddx = (1.0 / (2.0 * h)) * (map({x.x + h, x.y}) - map({x.x - h, x.y}));
      const Vec2 ddy = (1.0 / (2.0 * h)) * (map({x.x, x.y + h}) - map({x.x, x.y - h}));
      const double jac = std::abs(ddx.x * ddy.y - ddx.y * ddy.x);
      est.preimage_area += jac * cell;
      if (y.x >= q.x && y.x < q.x + 1.0 && y.y >= q.y && y.y < q.y + 1.0) {
        est.intersection_area += jac * cell;
      }
    }
  }
  return est;
}

double kolmogorov_tail(double lambda) noexcept {
  if (lambda <= 0.0) return 1.0;
  if (lambda < 1.18) {
    // Small-lambda form of the same series, converges fast here.
    const double pi2 = std::numbers::pi * std::numbers::pi;
    double sum = 0.0;
    for (int j = 1; j <= 8; ++j) {
      const double odd = 2.0 * j - 1.0;
      sum += std::exp(-odd * odd * pi2 / (8.0 * lambda * lambda));
    }
    return std::clamp(1.0 - std::sqrt(2.0 * std::numbers::pi) / lambda * sum, 0.0, 1.0);
  }
  double sum = 0.0;
  double sign = 1.0;
  for (int j = 1; j <= 100; ++j) {
    const double term = std::exp(-2.0 * j * j * lambda * lambda);
    sum += sign * term;
    if (term < 1e-16) break;
    sign = -sign;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

KsResult ks_normality(std::span<const double> values) {
  if (values.size() < 100) {
    throw InvalidArgumentError("ks_normality needs at least 100 values, got " +
                               std::to_string(values.size()));
  }
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const double n = static_cast<double>(sorted.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const double cdf = standard_normal_cdf(sorted[i]);
    d = std::max({d, (static_cast<double>(i) + 1.0) / n - cdf, cdf - static_cast<double>(i) / n});
  }
  const double sqrt_n = std::sqrt(n);
  return {d, kolmogorov_tail((sqrt_n + 0.12 + 0.11 / sqrt_n) * d)};
}

BridgeResult brownian_bridge_1d(double alpha, int k, std::uint64_t trials, const RngKey& key) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw InvalidArgumentError("alpha must lie in [0, 1]");
  if (k < 0 || k > 20) throw InvalidArgumentError("k must lie in [0, 20]");
  if (trials < 10000) throw InvalidArgumentError("brownian_bridge_1d needs >= 1e4 trials");

  const int cells = 1 << k;
  const double inv_sqrt_cells = 1.0 / std::sqrt(static_cast<double>(cells));
  // Cells of [0, 2) whose centers fall in the window [1 - alpha, 2 - alpha).
  const int first = static_cast<int>(std::ceil(cells * (1.0 - alpha) - 0.5));
  const std::uint64_t draws_per_trial = 2 + 2 * static_cast<std::uint64_t>(cells);

  double sxx[2][2] = {{0, 0}, {0, 0}};
  double sxz[2] = {0, 0};
  double szz = 0.0;
  std::vector<double> fine(static_cast<std::size_t>(2 * cells));
  for (std::uint64_t t = 0; t < trials; ++t) {
    const std::uint64_t base = t * draws_per_trial;
    const double x[2] = {standard_normal_at(key, base), standard_normal_at(key, base + 1)};
    for (int px = 0; px < 2; ++px) {
      double sum = 0.0;
      for (int c = 0; c < cells; ++c) {
        const double z = standard_normal_at(key, base + 2 + static_cast<std::uint64_t>(px * cells + c));
        fine[static_cast<std::size_t>(px * cells + c)] = z;
        sum += z;
      }
      const double mean = sum / cells;
      for (int c = 0; c < cells; ++c) {
        double& v = fine[static_cast<std::size_t>(px * cells + c)];
        v = x[px] * inv_sqrt_cells + (v - mean);
      }
    }
    double window = 0.0;
    for (int c = first; c < first + cells; ++c) window += fine[static_cast<std::size_t>(c)];
    const double z = window * inv_sqrt_cells;

    for (int a = 0; a < 2; ++a) {
      for (int b = 0; b < 2; ++b) sxx[a][b] += x[a] * x[b];
      sxz[a] += x[a] * z;
    }
    szz += z * z;
  }

  const double det = sxx[0][0] * sxx[1][1] - sxx[0][1] * sxx[1][0];
  const double inv00 = sxx[1][1] / det;
  const double inv11 = sxx[0][0] / det;
  const double inv01 = -sxx[0][1] / det;
  BridgeResult r;
  r.trials = trials;
  r.coef_prev = inv00 * sxz[0] + inv01 * sxz[1];
  r.coef_cur = inv01 * sxz[0] + inv11 * sxz[1];
  const double rss = std::max(0.0, szz - (r.coef_prev * sxz[0] + r.coef_cur * sxz[1]));
  const double dof = static_cast<double>(trials) - 2.0;
  r.residual_variance = rss / dof;
  r.coef_prev_se = std::sqrt(r.residual_variance * inv00);
  r.coef_cur_se = std::sqrt(r.residual_variance * inv11);
  r.residual_variance_se = r.residual_variance * std::sqrt(2.0 / dof);
  return r;
}

Image warp_image_bilinear(const Image& image, const FlowField& flow) {
  if (!flow.same_shape(image.width, image.height)) {
    throw InvalidArgumentError("warp_image_bilinear: flow and image dimensions differ");
  }
  Image out(image.width, image.height, image.channels);
  for (int y = 0; y < image.height; ++y) {
    for (int x = 0; x < image.width; ++x) {
      const Vec2 source = pixel_center({x, y}) + flow.at(x, y);
      for (int c = 0; c < image.channels; ++c) {
        out.at(x, y, c) = static_cast<float>(sample_raster(image.data, image.width, image.height,
                                                           image.channels, c, source,
                                                           InterpScheme::kBilinear));
      }
    }
  }
  return out;
}

double warp_error(std::span<const Image> frames, std::span<const FlowField> flows,
                  std::optional<std::span<const Mask>> masks) {
  if (frames.empty() || flows.size() + 1 != frames.size()) {
    throw InvalidArgumentError("warp_error needs n frames and n-1 flows, got " +
                               std::to_string(frames.size()) + " and " +
                               std::to_string(flows.size()));
  }
  if (masks && masks->size() != flows.size()) {
    throw InvalidArgumentError("warp_error needs one mask per flow");
  }
  double total = 0.0;
  std::size_t counted_frames = 0;
  for (std::size_t n = 1; n < frames.size(); ++n) {
    const Image& cur = frames[n];
    const Image& prev = frames[n - 1];
    const FlowField& flow = flows[n - 1];
    if (cur.width != prev.width || cur.height != prev.height || cur.channels != prev.channels) {
      throw InvalidArgumentError("warp_error: frames differ in shape");
    }
    const Image warped = warp_image_bilinear(prev, flow);
    double sse = 0.0;
    std::size_t count = 0;
    for (int y = 0; y < cur.height; ++y) {
      for (int x = 0; x < cur.width; ++x) {
        const Vec2 source = pixel_center({x, y}) + flow.at(x, y);
        if (source.x < 0.0 || source.y < 0.0 || source.x > cur.width || source.y > cur.height) {
          continue;
        }
        if (masks && (*masks)[n - 1].at(x, y) == 0) continue;
        for (int c = 0; c < cur.channels; ++c) {
          const double d = static_cast<double>(cur.at(x, y, c)) - warped.at(x, y, c);
          sse += d * d;
          ++count;
        }
      }
    }
    if (count == 0) continue;
    total += sse / static_cast<double>(count);
    ++counted_frames;
  }
  return counted_frames == 0 ? 0.0 : total / static_cast<double>(counted_frames);
}

}  // namespace noisewarp
