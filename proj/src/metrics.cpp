#include "surfacegrid/metrics.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "surfacegrid/error.hpp"

namespace surfacegrid {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void check_same_size(const DepthMap& a, const DepthMap& b) {
  if (a.width != b.width || a.height != b.height || a.values.size() != b.values.size())
    throw Error("depth map size mismatch: " + std::to_string(a.width) + "x" + std::to_string(a.height) +
                " vs " + std::to_string(b.width) + "x" + std::to_string(b.height));
  if (a.values.empty()) throw Error("empty depth map");
}

// Per-row partials, then an ordered sum of the rows: the result does not
// depend on the thread count.
template <typename RowFn>
double ordered_row_sum(const DepthMap& m, RowFn&& row_sum) {
  std::vector<double> rows(m.height, 0.0);
#pragma omp parallel for schedule(static)
  for (int r = 0; r < m.height; ++r) rows[r] = row_sum(r);
  double total = 0.0;
  for (double v : rows) total += v;
  return total;
}

}  // namespace

double msre(const DepthMap& pred, const DepthMap& truth) {
  check_same_size(pred, truth);
  const int w = truth.width;
  const double err = ordered_row_sum(truth, [&](int r) {
    double s = 0.0;
    for (int c = 0; c < w; ++c) {
      const double d = pred.at(r, c) - truth.at(r, c);
      s += d * d;
    }
    return s;
  });
  const double norm = ordered_row_sum(truth, [&](int r) {
    double s = 0.0;
    for (int c = 0; c < w; ++c) s += truth.at(r, c) * truth.at(r, c);
    return s;
  });
  if (norm == 0.0) throw Error("msre undefined: ground truth is all background");
  return err / norm;
}

double msre_serial(const DepthMap& pred, const DepthMap& truth) {
  check_same_size(pred, truth);
  double err = 0.0, norm = 0.0;
  for (std::size_t k = 0; k < truth.values.size(); ++k) {
    const double d = pred.values[k] - truth.values[k];
    err += d * d;
    norm += truth.values[k] * truth.values[k];
  }
  if (norm == 0.0) throw Error("msre undefined: ground truth is all background");
  return err / norm;
}

double mae(const DepthMap& pred, const DepthMap& truth) {
  check_same_size(pred, truth);
  const int w = truth.width;
  const double total = ordered_row_sum(truth, [&](int r) {
    double s = 0.0;
    for (int c = 0; c < w; ++c) s += std::abs(pred.at(r, c) - truth.at(r, c));
    return s;
  });
  return total / static_cast<double>(truth.values.size());
}

double mae_serial(const DepthMap& pred, const DepthMap& truth) {
  check_same_size(pred, truth);
  double total = 0.0;
  for (std::size_t k = 0; k < truth.values.size(); ++k) total += std::abs(pred.values[k] - truth.values[k]);
  return total / static_cast<double>(truth.values.size());
}

double report_mean(const EvalReport& r) {
  if (r.per_image.empty()) return 0.0;
  double s = 0.0;
  for (const auto& [_, v] : r.per_image) s += v;
  return s / static_cast<double>(r.per_image.size());
}

EvalOutcome evaluate(const fs::path& pred_dir, const fs::path& dataset_root, const DatasetManifest& manifest,
                     const std::vector<SubsetTag>& tags, const EvalOptions& options) {
  EvalOutcome outcome;
  for (auto tag : tags) {
    auto pairs = make_test_set(manifest, tag, options.size, options.seed);
    std::sort(pairs.begin(), pairs.end(),
              [](const ImagePair& a, const ImagePair& b) { return a.surface_path < b.surface_path; });

    std::vector<fs::path> pred_paths(pairs.size());
    bool all_present = true;
    for (std::size_t k = 0; k < pairs.size(); ++k) {
      const auto by_surface = pred_dir / pairs[k].surface_path;
      const auto by_depth = pred_dir / pairs[k].depth_path;
      if (fs::exists(by_surface)) pred_paths[k] = by_surface;
      else if (fs::exists(by_depth)) pred_paths[k] = by_depth;
      else {
        outcome.missing.push_back({to_string(tag), pairs[k].surface_path});
        all_present = false;
      }
    }
    if (!all_present) continue;

    EvalReport report;
    report.subset = to_string(tag);
    report.config_hash = manifest.config_hash;
    report.per_image.resize(pairs.size());
    std::vector<std::string> errors(pairs.size());
    const auto n = static_cast<std::int64_t>(pairs.size());
    const int threads = options.threads > 0 ? options.threads : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic, 1) num_threads(threads)
    for (std::int64_t k = 0; k < n; ++k) {
      try {
        const auto pred = read_depth_png(pred_paths[k]);
        const auto truth = read_depth_png(dataset_root / pairs[k].depth_path);
        report.per_image[k] = {pairs[k].surface_path, msre_serial(pred, truth)};
      } catch (const std::exception& e) {
        errors[k] = pairs[k].surface_path + ": " + e.what();
      }
    }
    for (const auto& e : errors)
      if (!e.empty()) throw Error(e);
    report.count = report.per_image.size();
    report.mean = report_mean(report);
    outcome.reports.push_back(std::move(report));
  }
  return outcome;
}

double relative_improvement(double base_mean, double next_mean) {
  if (base_mean == 0.0) throw Error("relative improvement undefined for a zero baseline");
  return 100.0 * (base_mean - next_mean) / base_mean;
}

double relative_improvement(const EvalReport& base, const EvalReport& next) {
  if (base.subset != next.subset)
    throw Error("relative improvement across different subsets: " + base.subset + " vs " + next.subset);
  return relative_improvement(base.mean, next.mean);
}

StopDecision early_stop(std::span<const double> history, std::size_t patience) {
  if (history.empty()) throw Error("early_stop needs a non-empty history");
  StopDecision d;
  d.rollback_epoch = static_cast<std::size_t>(std::min_element(history.begin(), history.end()) - history.begin());
  if (patience == 0 || history.size() < patience + 1) return d;
  for (std::size_t k = history.size() - patience; k < history.size(); ++k)
    if (!(history[k] > history[k - 1])) return d;
  d.action = StopDecision::Action::stop;
  return d;
}

namespace {

std::string fixed3(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.3f", v);
  return buf;
}

std::string display_name(const std::string& subset) {
  const auto dot = subset.find('.');
  return dot == std::string::npos ? subset : subset.substr(dot + 1);
}

std::string pad(std::string s, std::size_t width) {
  if (s.size() < width) s.append(width - s.size(), ' ');
  return s;
}

}  // namespace

std::string render_table(const std::vector<EvalReport>& reports) {
  std::size_t w = std::string("Test Set").size();
  for (const auto& r : reports) w = std::max(w, display_name(r.subset).size());
  std::string out = pad("Test Set", w) + "  MSRE (x1e-2)  N\n";
  out += std::string(w + 17, '-') + "\n";
  for (const auto& r : reports)
    out += pad(display_name(r.subset), w) + "  " + pad(fixed3(r.mean * 100.0), 12) + "  " +
           std::to_string(r.count) + "\n";
  return out;
}

std::string render_matrix(const std::vector<MatrixRow>& rows) {
  std::vector<std::string> columns;
  for (const auto& row : rows)
    for (const auto& r : row.reports)
      if (std::find(columns.begin(), columns.end(), r.subset) == columns.end()) columns.push_back(r.subset);
  std::size_t w = std::string("Training \\ Test").size();
  for (const auto& row : rows) w = std::max(w, row.variant.size());
  std::string out = pad("Training \\ Test", w);
  for (const auto& c : columns) out += "  " + pad(display_name(c), 12);
  out += "\n" + std::string(w + 14 * columns.size(), '-') + "\n";
  for (const auto& row : rows) {
    out += pad(row.variant, w);
    for (const auto& c : columns) {
      const auto it = std::find_if(row.reports.begin(), row.reports.end(),
                                   [&](const EvalReport& r) { return r.subset == c; });
      out += "  " + pad(it == row.reports.end() ? "-" : fixed3(it->mean * 100.0), 12);
    }
    out += "\n";
  }
  return out;
}

std::string reports_to_jsonl(const std::vector<EvalReport>& reports) {
  std::string out;
  for (const auto& r : reports) {
    json images = json::array();
    for (const auto& [path, v] : r.per_image) images.push_back({{"path", path}, {"msre", v}});
    json j = {{"subset", r.subset}, {"mean_msre", r.mean}, {"count", r.count},
              {"config_hash", r.config_hash}, {"images", images}};
    out += j.dump() + "\n";
  }
  return out;
}

std::vector<EvalReport> reports_from_jsonl(const std::string& text) {
  std::vector<EvalReport> out;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    try {
      const auto j = json::parse(line);
      EvalReport r;
      r.subset = j.at("subset").get<std::string>();
      r.mean = j.at("mean_msre").get<double>();
      r.count = j.at("count").get<std::size_t>();
      r.config_hash = j.at("config_hash").get<std::string>();
      for (const auto& img : j.at("images"))
        r.per_image.emplace_back(img.at("path").get<std::string>(), img.at("msre").get<double>());
      out.push_back(std::move(r));
    } catch (const json::exception& e) {
      throw Error(std::string("bad report record: ") + e.what());
    }
  }
  return out;
}

}  // namespace surfacegrid
