#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "surfacegrid/geometry.hpp"
#include "surfacegrid/renderer.hpp"

namespace surfacegrid {

enum class SubsetTag : std::uint8_t {
  // training variants
  train_baseline,
  train_viewpoints,
  train_angled_grids,
  train_lines,
  train_final,
  // test sets
  test_base,
  test_resolutions,
  test_angled_grids,
  test_lines,
  test_viewpoints,
  test_acc_viewpoints,
  test_full,
  test_general_grids,
  test_general_views,
};

inline constexpr int kSubsetTagCount = 14;

/// "train.Baseline", "test.AccViewpoints", ...
std::string to_string(SubsetTag tag);
/// Accepts the prefixed form, or a bare name resolved against `prefer_training`.
std::optional<SubsetTag> parse_subset_tag(const std::string& name, bool prefer_training = false);
bool is_training_tag(SubsetTag tag);
bool is_test_tag(SubsetTag tag);
const std::vector<SubsetTag>& all_subset_tags();

class TagSet {
 public:
  void insert(SubsetTag t) { bits_ |= bit(t); }
  bool contains(SubsetTag t) const { return (bits_ & bit(t)) != 0; }
  bool empty() const { return bits_ == 0; }
  std::vector<SubsetTag> tags() const;
  bool operator==(const TagSet&) const = default;

 private:
  static std::uint32_t bit(SubsetTag t) { return std::uint32_t{1} << static_cast<int>(t); }
  std::uint32_t bits_ = 0;
};

enum class Split { none, train, validation, test };
std::string to_string(Split s);
std::optional<Split> parse_split(const std::string& s);

struct FunctionRange {
  std::int64_t first = 0;
  std::int64_t last = -1;  // inclusive; last < first is empty

  bool contains(std::int64_t id) const { return id >= first && id <= last; }
  bool empty() const { return last < first; }
  bool overlaps(const FunctionRange& o) const {
    return !empty() && !o.empty() && first <= o.last && o.first <= last;
  }
  bool operator==(const FunctionRange&) const = default;
};

/// One family of surface renders: every grid in `grids` crossed with every
/// view in `views`, for each function in `functions`. With per_function = k
/// > 0 each function instead gets k consecutive combinations from that cross
/// product, starting at offset (id * k) mod size.
struct RecipeEntry {
  std::string name;
  std::vector<GridSpec> grids;
  std::vector<Viewpoint> views;
  FunctionRange functions;
  int per_function = 0;
};

struct DatasetConfig {
  std::uint64_t seed = 1;
  std::int64_t function_count = 2000;
  double volume = kDefaultVolume;
  std::vector<Viewpoint> depth_views;
  std::vector<RecipeEntry> recipe;
  FunctionRange train{0, 1799};
  FunctionRange validation{1800, 1899};
  FunctionRange test{1900, 1999};
  int threads = 0;  // 0 = available parallelism; not part of the hash

  /// Throws RangeError / Error with the offending field.
  void validate() const;
  /// Hex fingerprint of everything that affects output bytes.
  std::string hash() const;

  nlohmann::json to_json() const;
  static DatasetConfig from_json(const nlohmann::json& j);

  /// The published recipe: 2000 functions, 10 viewpoints, 78,600 surfaces.
  static DatasetConfig standard();
  /// 5 functions x 2 viewpoints x 2 grids.
  static DatasetConfig tiny();
};

enum class JobKind { function, depth, surface };
std::string to_string(JobKind k);

struct RenderJob {
  JobKind kind = JobKind::function;
  std::int64_t function_id = 0;
  Viewpoint view;        // depth and surface jobs
  GridSpec grid;         // surface jobs
  std::string path;      // relative to the dataset root
  std::string depth_path;  // surface jobs: the paired depth map
  Split split = Split::none;
  TagSet tags;
};

struct ManifestRecord : RenderJob {
  std::string checksum;  // FNV-1a of the file bytes, hex
};

struct DatasetManifest {
  std::uint64_t seed = 0;
  std::string config_hash;
  FunctionRange train, validation, test;
  std::vector<ManifestRecord> records;

  std::size_t count(JobKind k) const;
  std::string serialize() const;
  std::string hash() const;
  static DatasetManifest parse(const std::string& text, const std::string& source = "<memory>");
  void write(const std::filesystem::path& path) const;
  static DatasetManifest read(const std::filesystem::path& path);
};

inline constexpr const char* kManifestFile = "manifest.jsonl";
inline constexpr const char* kConfigEcho = "config.json";

std::string function_path(std::int64_t id);
std::string depth_path(std::int64_t id, const Viewpoint& v);
std::string surface_path(std::int64_t id, const Viewpoint& v, const GridSpec& g);

/// Subset membership of one surface render.
TagSet classify_surface(Split split, const Viewpoint& v, const GridSpec& g);

/// Every job of the configuration, sorted by path.
std::vector<RenderJob> plan_dataset(const DatasetConfig& cfg);
/// The manifest a build would produce, without checksums.
DatasetManifest plan_manifest(const DatasetConfig& cfg);

struct BuildOptions {
  int threads = 0;  // overrides cfg.threads when > 0
};

struct JobFailure {
  std::string path;
  std::string message;
};

struct BuildReport {
  DatasetManifest manifest;
  std::size_t planned = 0;
  std::size_t executed = 0;
  std::size_t skipped = 0;
  std::vector<JobFailure> failures;
};

/// Renders every missing or stale job into out_dir and writes the manifest
/// and a config echo. A job is skipped when the previous manifest (same
/// config hash) records a checksum matching the file on disk. Job failures
/// are collected, not thrown.
BuildReport build(const DatasetConfig& cfg, const std::filesystem::path& out_dir,
                  const BuildOptions& options = {});

struct ImagePair {
  std::string surface_path;
  std::string depth_path;
  std::int64_t function_id = 0;
  Viewpoint view;
  GridSpec grid;
};

/// All surface records of `split` tagged with `tag`, sorted by path.
std::vector<ImagePair> subset_pool(const DatasetManifest& m, SubsetTag tag, Split split);

/// Shuffled sample of `size` pairs; throws RangeError if the pool is smaller.
std::vector<ImagePair> make_training_set(const DatasetManifest& m, SubsetTag variant,
                                         std::size_t size = 1800, std::uint64_t seed = 0);
std::vector<ImagePair> make_validation_set(const DatasetManifest& m, SubsetTag variant,
                                           std::size_t size = 100, std::uint64_t seed = 0);
std::vector<ImagePair> make_test_set(const DatasetManifest& m, SubsetTag tag, std::size_t size = 100,
                                     std::uint64_t seed = 0);

/// Split hygiene and pairing checks; returns human-readable violations.
std::vector<std::string> check_manifest(const DatasetManifest& m);

}  // namespace surfacegrid
