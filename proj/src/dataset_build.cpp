#include <omp.h>

#include <map>
#include <optional>

#include "surfacegrid/dataset.hpp"
#include "surfacegrid/error.hpp"
#include "surfacegrid/hash.hpp"
#include "text_util.hpp"

namespace surfacegrid {

namespace fs = std::filesystem;

namespace {

struct JobOutcome {
  bool executed = false;
  std::string checksum;
  std::optional<std::string> error;
};

// Jobs of one function, grouped by viewpoint so each view is rasterized once.
struct FunctionTask {
  std::int64_t id = 0;
  std::optional<std::size_t> function_job;
  std::vector<std::pair<Viewpoint, std::vector<std::size_t>>> views;
};

std::vector<FunctionTask> group_jobs(const std::vector<RenderJob>& jobs) {
  std::map<std::int64_t, FunctionTask> tasks;
  for (std::size_t k = 0; k < jobs.size(); ++k) {
    const auto& job = jobs[k];
    auto& task = tasks[job.function_id];
    task.id = job.function_id;
    if (job.kind == JobKind::function) {
      task.function_job = k;
      continue;
    }
    auto it = std::find_if(task.views.begin(), task.views.end(),
                           [&](const auto& entry) { return entry.first == job.view; });
    if (it == task.views.end()) {
      task.views.push_back({job.view, {}});
      it = std::prev(task.views.end());
    }
    // depth job first so a view's depth map is written before its surfaces
    if (job.kind == JobKind::depth) it->second.insert(it->second.begin(), k);
    else it->second.push_back(k);
  }
  std::vector<FunctionTask> out;
  out.reserve(tasks.size());
  for (auto& [_, t] : tasks) out.push_back(std::move(t));
  return out;
}

std::map<std::string, std::string> previous_checksums(const fs::path& manifest_path,
                                                      const std::string& config_hash) {
  std::map<std::string, std::string> out;
  if (!fs::exists(manifest_path)) return out;
  try {
    const auto old = DatasetManifest::read(manifest_path);
    if (old.config_hash != config_hash) return out;
    for (const auto& r : old.records)
      if (!r.checksum.empty()) out[r.path] = r.checksum;
  } catch (const Error&) {
    // unreadable manifest: rebuild everything
  }
  return out;
}

bool up_to_date(const fs::path& file, const std::map<std::string, std::string>& previous,
                const std::string& rel, std::string& checksum) {
  const auto it = previous.find(rel);
  if (it == previous.end()) return false;
  std::error_code ec;
  if (!fs::is_regular_file(file, ec)) return false;
  try {
    const auto actual = to_hex(hash_file(file.string()));
    if (actual != it->second) return false;
    checksum = actual;
    return true;
  } catch (const IoError&) {
    return false;
  }
}

void run_task(const FunctionTask& task, const DatasetConfig& cfg, const std::vector<RenderJob>& jobs,
              const fs::path& root, const std::map<std::string, std::string>& previous,
              std::vector<JobOutcome>& outcomes) {
  auto pending = [&](std::size_t k) {
    return !up_to_date(root / jobs[k].path, previous, jobs[k].path, outcomes[k].checksum);
  };
  auto finish = [&](std::size_t k, auto&& write) {
    try {
      write(root / jobs[k].path);
      outcomes[k].checksum = to_hex(hash_file((root / jobs[k].path).string()));
      outcomes[k].executed = true;
    } catch (const std::exception& e) {
      outcomes[k].error = e.what();
    }
  };

  const bool function_pending = task.function_job && pending(*task.function_job);
  std::vector<std::pair<const Viewpoint*, std::vector<std::size_t>>> todo;
  for (const auto& [view, ids] : task.views) {
    std::vector<std::size_t> missing;
    for (auto k : ids)
      if (pending(k)) missing.push_back(k);
    if (!missing.empty()) todo.emplace_back(&view, std::move(missing));
  }
  if (!function_pending && todo.empty()) return;

  const auto f = synth_function(cfg.seed, task.id, cfg.volume);
  if (function_pending) finish(*task.function_job, [&](const fs::path& p) { save_function(f, p); });
  if (todo.empty()) return;

  // Runs inside the parallel job map, so use the serial kernel.
  const auto field = eval_function_serial(f);
  for (const auto& [view, ids] : todo) {
    std::optional<ViewRaster> raster;
    try {
      raster = rasterize(field, *view);
    } catch (const std::exception& e) {
      for (auto k : ids) outcomes[k].error = e.what();
      continue;
    }
    for (auto k : ids) {
      const auto& job = jobs[k];
      if (job.kind == JobKind::depth)
        finish(k, [&](const fs::path& p) { write_depth_png(raster->depth_map(), p); });
      else
        finish(k, [&](const fs::path& p) { write_surface_png(mark_surface(*raster, job.grid), p); });
    }
  }
}

}  // namespace

BuildReport build(const DatasetConfig& cfg, const fs::path& out_dir, const BuildOptions& options) {
  cfg.validate();
  const auto planned = plan_manifest(cfg);
  std::vector<RenderJob> jobs;
  jobs.reserve(planned.records.size());
  for (const auto& r : planned.records) jobs.push_back(r);

  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create " + out_dir.string() + ": " + ec.message());

  const auto previous = previous_checksums(out_dir / kManifestFile, planned.config_hash);
  const auto tasks = group_jobs(jobs);
  std::vector<JobOutcome> outcomes(jobs.size());

  int threads = options.threads > 0 ? options.threads : cfg.threads;
  if (threads <= 0) threads = omp_get_max_threads();
  const auto task_count = static_cast<std::int64_t>(tasks.size());
#pragma omp parallel for schedule(dynamic, 1) num_threads(threads)
  for (std::int64_t t = 0; t < task_count; ++t) {
    try {
      run_task(tasks[t], cfg, jobs, out_dir, previous, outcomes);
    } catch (const std::exception& e) {
      // failure outside a single job (e.g. function synthesis): charge every
      // job of the task that has no result yet
      const auto& task = tasks[t];
      auto charge = [&](std::size_t k) {
        if (outcomes[k].checksum.empty() && !outcomes[k].error) outcomes[k].error = e.what();
      };
      if (task.function_job) charge(*task.function_job);
      for (const auto& [_, ids] : task.views)
        for (auto k : ids) charge(k);
    }
  }

  BuildReport report;
  report.planned = jobs.size();
  report.manifest = planned;
  report.manifest.records.clear();
  for (std::size_t k = 0; k < jobs.size(); ++k) {
    const auto& outcome = outcomes[k];
    if (outcome.error) {
      report.failures.push_back({jobs[k].path, *outcome.error});
      continue;
    }
    ManifestRecord r = planned.records[k];
    r.checksum = outcome.checksum;
    report.manifest.records.push_back(std::move(r));
    if (outcome.executed) ++report.executed;
    else ++report.skipped;
  }

  report.manifest.write(out_dir / kManifestFile);
  write_text_file(out_dir / kConfigEcho, cfg.to_json().dump(2) + "\n");
  return report;
}

}  // namespace surfacegrid
