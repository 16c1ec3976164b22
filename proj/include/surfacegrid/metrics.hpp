#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "surfacegrid/dataset.hpp"
#include "surfacegrid/image.hpp"

namespace surfacegrid {

// Mean-squared relative error, ratio-of-sums form over every pixel
// (background included):
//
//   msre = sum_p (pred_p - truth_p)^2 / sum_p truth_p^2
//
// Throws Error on a size mismatch or an all-zero truth.
double msre(const DepthMap& pred, const DepthMap& truth);
double msre_serial(const DepthMap& pred, const DepthMap& truth);

/// Mean of |pred - truth| over every pixel.
double mae(const DepthMap& pred, const DepthMap& truth);
double mae_serial(const DepthMap& pred, const DepthMap& truth);

struct EvalReport {
  std::string subset;
  std::vector<std::pair<std::string, double>> per_image;  // (surface path, msre), sorted by path
  double mean = 0.0;
  std::size_t count = 0;
  std::string config_hash;
};

struct MissingPrediction {
  std::string subset;
  std::string surface_path;
};

struct EvalOutcome {
  std::vector<EvalReport> reports;           // subsets with every prediction present
  std::vector<MissingPrediction> missing;    // subsets listed here were skipped
  bool complete() const { return missing.empty(); }
};

struct EvalOptions {
  std::size_t size = 100;
  std::uint64_t seed = 0;
  int threads = 0;
};

/// Scores predictions for the test sets `tags`. The prediction for a pair
/// is pred_dir/<surface path>, falling back to pred_dir/<depth path>.
EvalOutcome evaluate(const std::filesystem::path& pred_dir, const std::filesystem::path& dataset_root,
                     const DatasetManifest& manifest, const std::vector<SubsetTag>& tags,
                     const EvalOptions& options = {});

/// Arithmetic mean over per_image in path order.
double report_mean(const EvalReport& r);

/// 100 * (base - next) / base; positive means `next` is better.
double relative_improvement(double base_mean, double next_mean);
double relative_improvement(const EvalReport& base, const EvalReport& next);

struct StopDecision {
  enum class Action { keep_going, stop };
  Action action = Action::keep_going;
  std::size_t rollback_epoch = 0;  // 0-based index of the minimum
  bool stop() const { return action == Action::stop; }
};

/// Stop once the last `patience` epoch-to-epoch deltas are all strictly
/// positive. Throws Error on an empty history.
StopDecision early_stop(std::span<const double> history, std::size_t patience = 50);

/// One row per subset, MSRE x 1e-2.
std::string render_table(const std::vector<EvalReport>& reports);

/// Rows = training variants, columns = test sets, MSRE x 1e-2.
struct MatrixRow {
  std::string variant;
  std::vector<EvalReport> reports;
};
std::string render_matrix(const std::vector<MatrixRow>& rows);

/// Machine-readable form: one JSON object per report per line.
std::string reports_to_jsonl(const std::vector<EvalReport>& reports);
std::vector<EvalReport> reports_from_jsonl(const std::string& text);

}  // namespace surfacegrid
