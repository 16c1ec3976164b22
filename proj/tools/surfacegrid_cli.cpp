// surfacegrid: generate, inspect and score grid-marked surface datasets.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "surfacegrid/dataset.hpp"
#include "surfacegrid/error.hpp"
#include "surfacegrid/gauss_synth.hpp"
#include "surfacegrid/metrics.hpp"
#include "surfacegrid/renderer.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace surfacegrid;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw IoError("cannot open " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& p, const std::string& content) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + p.string());
  out << content;
}

struct ConfigFlags {
  std::string config_path;
  std::string preset = "standard";
  std::optional<std::uint64_t> seed;
  std::optional<std::int64_t> functions;
  std::optional<int> threads;

  void attach(CLI::App* app) {
    app->add_option("--config", config_path, "JSON config file (overrides the preset)");
    app->add_option("--preset", preset, "Built-in config: standard or tiny")
        ->check(CLI::IsMember({"standard", "tiny"}))
        ->capture_default_str();
    app->add_option("--seed", seed, "Master seed override");
    app->add_option("--functions", functions,
                    "Function count override; recipe and split ranges are clipped to it");
    app->add_option("--threads", threads, "Worker threads (0 = all)");
  }

  DatasetConfig resolve() const {
    DatasetConfig cfg = preset == "tiny" ? DatasetConfig::tiny() : DatasetConfig::standard();
    if (!config_path.empty()) {
      try {
        cfg = DatasetConfig::from_json(json::parse(slurp(config_path)));
      } catch (const json::exception& e) {
        throw Error(config_path + ": " + e.what());
      }
    }
    if (seed) cfg.seed = *seed;
    if (threads) cfg.threads = *threads;
    if (functions) {
      cfg.function_count = *functions;
      auto clip = [&](FunctionRange& r) { r.last = std::min(r.last, *functions - 1); };
      clip(cfg.train);
      clip(cfg.validation);
      clip(cfg.test);
      for (auto& e : cfg.recipe) clip(e.functions);
    }
    cfg.validate();
    return cfg;
  }
};

json counts_json(const DatasetManifest& m) {
  return {{"function", m.count(JobKind::function)},
          {"depth", m.count(JobKind::depth)},
          {"surface", m.count(JobKind::surface)},
          {"total_images", m.count(JobKind::depth) + m.count(JobKind::surface)}};
}

// --- gen-functions ----------------------------------------------------------

int cmd_gen_functions(const ConfigFlags& flags, const std::string& out, bool as_json) {
  const auto cfg = flags.resolve();
  const fs::path root(out);
  std::string fragment;
  for (std::int64_t id = 0; id < cfg.function_count; ++id) {
    const auto f = synth_function(cfg.seed, id, cfg.volume);
    const auto rel = function_path(id);
    save_function(f, root / rel);
    fragment += json{{"type", "function"}, {"path", rel}, {"function_id", id}, {"components", f.components.size()}}.dump() + "\n";
  }
  write_file(root / "functions.jsonl", fragment);
  write_file(root / kConfigEcho, cfg.to_json().dump(2) + "\n");
  if (as_json) std::cout << json{{"functions", cfg.function_count}, {"seed", cfg.seed}}.dump() << "\n";
  else std::cout << "wrote " << cfg.function_count << " function files to " << (root / "functions").string() << "\n";
  return 0;
}

// --- build ------------------------------------------------------------------

int cmd_build(const ConfigFlags& flags, const std::string& out, bool dry_run, bool as_json) {
  const auto cfg = flags.resolve();
  const auto plan = plan_manifest(cfg);
  const json summary = {{"seed", cfg.seed}, {"config_hash", plan.config_hash}, {"planned", counts_json(plan)}};
  if (as_json) std::cout << summary.dump() << "\n";
  else
    std::cout << "plan: " << plan.count(JobKind::function) << " functions, " << plan.count(JobKind::depth)
              << " depth maps, " << plan.count(JobKind::surface) << " surfaces (config " << plan.config_hash
              << ", seed " << cfg.seed << ")\n";
  if (dry_run) return 0;
  if (out.empty()) throw Error("build needs --out unless --dry-run is given");

  const auto t0 = std::chrono::steady_clock::now();
  const auto report = build(cfg, out);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  for (const auto& f : report.failures) std::cerr << "failed: " << f.path << ": " << f.message << "\n";
  if (as_json) {
    std::cout << json{{"executed", report.executed}, {"skipped", report.skipped},
                      {"failed", report.failures.size()}, {"manifest_hash", report.manifest.hash()},
                      {"seconds", secs}}.dump()
              << "\n";
  } else {
    std::cout << "built " << report.executed << " jobs, skipped " << report.skipped << " up to date, "
              << report.failures.size() << " failed in " << secs << " s\n"
              << "manifest " << (fs::path(out) / kManifestFile).string() << " hash " << report.manifest.hash()
              << "\n";
  }
  return report.failures.empty() ? 0 : 1;
}

// --- eval -------------------------------------------------------------------

std::vector<SubsetTag> parse_test_tags(const std::vector<std::string>& names) {
  std::vector<SubsetTag> out;
  for (const auto& n : names) {
    const auto t = parse_subset_tag(n, false);
    if (!t || !is_test_tag(*t)) throw Error("unknown test set '" + n + "'");
    out.push_back(*t);
  }
  if (out.empty())
    for (auto t : all_subset_tags())
      if (is_test_tag(t)) out.push_back(t);
  return out;
}

int cmd_eval(const std::vector<std::string>& preds, const std::string& dataset, std::string manifest_path,
             const std::vector<std::string>& tag_names, std::size_t size, std::optional<std::uint64_t> seed,
             const std::string& out, int threads, bool as_json) {
  if (manifest_path.empty()) manifest_path = (fs::path(dataset) / kManifestFile).string();
  const auto manifest = DatasetManifest::read(manifest_path);
  const auto tags = parse_test_tags(tag_names);

  std::vector<std::pair<std::string, std::string>> runs;
  for (const auto& p : preds) {
    const auto eq = p.find('=');
    if (eq == std::string::npos) runs.emplace_back("", p);
    else runs.emplace_back(p.substr(0, eq), p.substr(eq + 1));
  }

  EvalOptions opts;
  opts.size = size;
  opts.seed = seed.value_or(manifest.seed);
  opts.threads = threads;

  bool complete = true;
  std::vector<MatrixRow> rows;
  std::string jsonl;
  for (const auto& [name, dir] : runs) {
    const auto outcome = evaluate(dir, dataset, manifest, tags, opts);
    for (const auto& m : outcome.missing) std::cerr << "missing prediction: " << m.subset << " " << m.surface_path << "\n";
    complete = complete && outcome.complete();
    rows.push_back({name.empty() ? fs::path(dir).filename().string() : name, outcome.reports});
    for (const auto& line : outcome.reports) {
      auto j = json::parse(reports_to_jsonl({line}));
      j["prediction"] = rows.back().variant;
      jsonl += j.dump() + "\n";
    }
  }

  const std::string table = rows.size() == 1 ? render_table(rows.front().reports) : render_matrix(rows);
  if (as_json) std::cout << jsonl;
  else std::cout << table;
  if (!out.empty()) {
    const json echo = {{"dataset", dataset}, {"manifest", manifest_path}, {"predictions", preds},
                       {"size", size},       {"seed", opts.seed},        {"tags", tag_names}};
    write_file(fs::path(out) / "report.txt", table);
    write_file(fs::path(out) / "report.jsonl", jsonl);
    write_file(fs::path(out) / "eval_config.json", echo.dump(2) + "\n");
  }
  return complete ? 0 : 2;
}

// --- preprocess -------------------------------------------------------------

int cmd_preprocess(const std::string& in, const std::string& out, const std::string& threshold, bool as_json) {
  ThresholdMode mode = ThresholdMode::automatic();
  if (threshold != "auto") {
    try {
      std::size_t used = 0;
      const double t = std::stod(threshold, &used);
      if (used != threshold.size()) throw std::invalid_argument(threshold);
      mode = ThresholdMode::fixed_at(t);
    } catch (const std::exception&) {
      throw Error("--threshold must be 'auto' or a number in [0, 1]");
    }
  }
  const auto image = read_gray_image(in);
  const auto binary = binarize_real_plot(image, mode);
  write_surface_png(binary, out);
  if (as_json)
    std::cout << json{{"input", in}, {"output", out}, {"threshold", threshold}, {"white_fraction", binary.white_fraction()}}.dump() << "\n";
  else
    std::cout << "wrote " << out << " (white fraction " << binary.white_fraction() << ")\n";
  return 0;
}

// --- inspect ----------------------------------------------------------------

int cmd_inspect(const std::string& manifest_path, bool as_json) {
  const auto m = DatasetManifest::read(manifest_path);
  std::map<std::string, std::size_t> by_split, by_tag;
  for (const auto& r : m.records) {
    if (r.kind != JobKind::surface) continue;
    ++by_split[to_string(r.split)];
    for (auto t : r.tags.tags()) ++by_tag[to_string(t)];
  }
  const auto problems = check_manifest(m);
  if (as_json) {
    std::cout << json{{"seed", m.seed},         {"config_hash", m.config_hash}, {"manifest_hash", m.hash()},
                      {"counts", counts_json(m)}, {"surfaces_by_split", by_split}, {"surfaces_by_tag", by_tag},
                      {"problems", problems}}.dump()
              << "\n";
  } else {
    std::cout << "seed " << m.seed << "  config " << m.config_hash << "  manifest " << m.hash() << "\n"
              << "functions " << m.count(JobKind::function) << "  depth maps " << m.count(JobKind::depth)
              << "  surfaces " << m.count(JobKind::surface) << "\n";
    for (const auto& [k, v] : by_split) std::cout << "  split " << k << ": " << v << "\n";
    for (const auto& [k, v] : by_tag) std::cout << "  pool " << k << ": " << v << "\n";
    for (const auto& p : problems) std::cout << "problem: " << p << "\n";
  }
  return problems.empty() ? 0 : 1;
}

// --- subset -----------------------------------------------------------------

int cmd_subset(const std::string& manifest_path, const std::string& tag_name, const std::string& split_name,
               std::size_t size, std::optional<std::uint64_t> seed) {
  const auto m = DatasetManifest::read(manifest_path);
  const auto split = parse_split(split_name);
  if (!split || *split == Split::none) throw Error("--split must be train, validation or test");
  const auto tag = parse_subset_tag(tag_name, *split != Split::test);
  if (!tag) throw Error("unknown subset tag '" + tag_name + "'");
  const auto s = seed.value_or(m.seed);
  std::vector<ImagePair> pairs;
  if (*split == Split::train) pairs = make_training_set(m, *tag, size, s);
  else if (*split == Split::validation) pairs = make_validation_set(m, *tag, size, s);
  else pairs = make_test_set(m, *tag, size, s);
  for (const auto& p : pairs)
    std::cout << json{{"surface", p.surface_path}, {"depth", p.depth_path}, {"function_id", p.function_id}}.dump()
              << "\n";
  return 0;
}

// --- early-stop -------------------------------------------------------------

int cmd_early_stop(const std::string& log_path, std::size_t patience, const std::string& field) {
  std::istringstream in(slurp(log_path));
  std::vector<double> history;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    history.push_back(json::parse(line).at(field).get<double>());
  }
  const auto d = early_stop(history, patience);
  std::cout << json{{"action", d.stop() ? "stop" : "continue"}, {"rollback_epoch", d.rollback_epoch},
                    {"epochs", history.size()}}.dump()
            << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"SurfaceGrid dataset generator and depth-map evaluation harness"};
  app.require_subcommand(1);
  bool as_json = false;
  app.add_flag("--json", as_json, "Machine-readable output");

  ConfigFlags gen_flags;
  std::string gen_out;
  auto* gen = app.add_subcommand("gen-functions", "Synthesize the Gaussian-sum functions");
  gen_flags.attach(gen);
  gen->add_option("--out", gen_out, "Output directory")->required();

  ConfigFlags build_flags;
  std::string build_out;
  bool dry_run = false;
  auto* bld = app.add_subcommand("build", "Render depth maps and grid-marked surfaces, write the manifest");
  build_flags.attach(bld);
  bld->add_option("--out", build_out, "Dataset root directory");
  bld->add_flag("--dry-run", dry_run, "Print the plan only");

  std::vector<std::string> preds, tag_names;
  std::string dataset, manifest_path, eval_out;
  std::size_t size = 100;
  std::optional<std::uint64_t> eval_seed;
  int eval_threads = 0;
  auto* ev = app.add_subcommand("eval", "Score predicted depth maps on the test sets");
  ev->add_option("--pred", preds, "Prediction directory, or name=dir; repeat for a comparison matrix")->required();
  ev->add_option("--dataset", dataset, "Dataset root")->required();
  ev->add_option("--manifest", manifest_path, "Manifest (default <dataset>/manifest.jsonl)");
  ev->add_option("--tags", tag_names, "Test sets, e.g. Base,Full (default all)")->delimiter(',');
  ev->add_option("--size", size, "Pairs per test set")->capture_default_str();
  ev->add_option("--seed", eval_seed, "Sampling seed (default: manifest seed)");
  ev->add_option("--out", eval_out, "Directory for report.txt / report.jsonl");
  ev->add_option("--threads", eval_threads, "Worker threads (0 = all)");

  std::string pre_in, pre_out, threshold = "auto";
  auto* pre = app.add_subcommand("preprocess", "Binarize a real plot into a white-on-black 512x512 image");
  pre->add_option("--in", pre_in, "Input image (PNG or PGM)")->required()->check(CLI::ExistingFile);
  pre->add_option("--out", pre_out, "Output PNG")->required();
  pre->add_option("--threshold", threshold, "'auto' (Otsu) or a fixed level in [0, 1]")->capture_default_str();

  std::string inspect_manifest;
  auto* ins = app.add_subcommand("inspect", "Print manifest statistics and consistency problems");
  ins->add_option("manifest", inspect_manifest, "Manifest file")->required()->check(CLI::ExistingFile);

  std::string sub_manifest, sub_tag, sub_split = "train";
  std::size_t sub_size = 1800;
  std::optional<std::uint64_t> sub_seed;
  auto* sub = app.add_subcommand("subset", "Emit a training, validation or test pair list as JSON lines");
  sub->add_option("--manifest", sub_manifest, "Manifest file")->required()->check(CLI::ExistingFile);
  sub->add_option("--tag", sub_tag, "Subset tag, e.g. Baseline or Base")->required();
  sub->add_option("--split", sub_split, "train, validation or test")->capture_default_str();
  sub->add_option("--size", sub_size, "Number of pairs")->capture_default_str();
  sub->add_option("--seed", sub_seed, "Sampling seed (default: manifest seed)");

  std::string log_path, field = "val_mae";
  std::size_t patience = 50;
  auto* es = app.add_subcommand("early-stop", "Apply the early-stopping rule to a training log");
  es->add_option("--log", log_path, "Training log, one JSON object per epoch")->required()->check(CLI::ExistingFile);
  es->add_option("--patience", patience, "Consecutive increases that trigger a stop")->capture_default_str();
  es->add_option("--field", field, "Validation metric field")->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen) return cmd_gen_functions(gen_flags, gen_out, as_json);
    if (*bld) return cmd_build(build_flags, build_out, dry_run, as_json);
    if (*ev) return cmd_eval(preds, dataset, manifest_path, tag_names, size, eval_seed, eval_out, eval_threads, as_json);
    if (*pre) return cmd_preprocess(pre_in, pre_out, threshold, as_json);
    if (*ins) return cmd_inspect(inspect_manifest, as_json);
    if (*sub) return cmd_subset(sub_manifest, sub_tag, sub_split, sub_size, sub_seed);
    if (*es) return cmd_early_stop(log_path, patience, field);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
