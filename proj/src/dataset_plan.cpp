#include <algorithm>
#include <cstdio>
#include <map>
#include <set>
#include <sstream>

#include "surfacegrid/dataset.hpp"
#include "surfacegrid/error.hpp"
#include "surfacegrid/hash.hpp"
#include "surfacegrid/rng.hpp"
#include "text_util.hpp"

namespace surfacegrid {

using nlohmann::json;

std::string function_path(std::int64_t id) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "f%04lld", static_cast<long long>(id));
  return std::string("functions/") + buf + ".txt";
}

namespace {

std::string function_dir(std::int64_t id) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "f%04lld", static_cast<long long>(id));
  return buf;
}

std::string view_stem(const Viewpoint& v) {
  std::string s = "t" + format_real(v.azimuth_deg) + "_p" + format_real(v.elevation_deg);
  if (v.radius != kDefaultCameraRadius) s += "_r" + format_real(v.radius);
  return s;
}

std::string grid_stem(const GridSpec& g) {
  std::string s = to_string(g.pattern) + "_" + format_real(g.spacing_u) + "x" + format_real(g.spacing_v) +
                  "_w" + format_real(g.line_width) + "_a" + format_real(g.angle_deg);
  if (!g.draw_boundary) s += "_nb";
  return s;
}

Split split_of(const FunctionRange& train, const FunctionRange& val, const FunctionRange& test,
               std::int64_t id) {
  if (train.contains(id)) return Split::train;
  if (val.contains(id)) return Split::validation;
  if (test.contains(id)) return Split::test;
  return Split::none;
}

// ---------------------------------------------------------------------------
// Image-type classification behind the subset tags.

enum class ViewClass { base, accidental, novel };

bool is_octant_angle(double a) { return a == 0.0 || a == 30.0 || a == 60.0; }

ViewClass classify_view(const Viewpoint& v) {
  if (is_octant_angle(v.azimuth_deg) && is_octant_angle(v.elevation_deg))
    return v.elevation_deg == 30.0 ? ViewClass::base : ViewClass::accidental;
  return ViewClass::novel;
}

bool is_octant(const Viewpoint& v) { return classify_view(v) != ViewClass::novel; }

enum class Marking { square20, resolution, angled_grid, lines, angled_lines };

Marking classify_marking(const GridSpec& g) {
  if (g.pattern == LinePattern::grid) {
    if (g.angle_deg != 0.0) return Marking::angled_grid;
    if (g.spacing_u == 20.0 && g.spacing_v == 20.0 && g.line_width == 3.0) return Marking::square20;
    return Marking::resolution;
  }
  return g.angle_deg != 0.0 ? Marking::angled_lines : Marking::lines;
}

double drawn_spacing(const GridSpec& g) {
  return g.pattern == LinePattern::lines_v ? g.spacing_v : g.spacing_u;
}

}  // namespace

std::string depth_path(std::int64_t id, const Viewpoint& v) {
  return "depth/" + function_dir(id) + "/" + view_stem(v) + ".png";
}

std::string surface_path(std::int64_t id, const Viewpoint& v, const GridSpec& g) {
  return "surface/" + function_dir(id) + "/" + view_stem(v) + "_" + grid_stem(g) + ".png";
}

TagSet classify_surface(Split split, const Viewpoint& v, const GridSpec& g) {
  TagSet tags;
  const auto vc = classify_view(v);
  const auto mk = classify_marking(g);
  if (split == Split::train || split == Split::validation) {
    if (!is_octant(v)) return tags;
    const bool square = mk == Marking::square20;
    const bool angled = mk == Marking::angled_grid && g.spacing_u == 20.0 && g.spacing_v == 20.0 &&
                        (g.angle_deg == 30.0 || g.angle_deg == 60.0);
    const bool lines37 = mk == Marking::lines && drawn_spacing(g) == 37.0;
    if (square && v.azimuth_deg == 30.0 && v.elevation_deg == 30.0) tags.insert(SubsetTag::train_baseline);
    if (square) tags.insert(SubsetTag::train_viewpoints);
    if (square || angled) tags.insert(SubsetTag::train_angled_grids);
    if (square || lines37) tags.insert(SubsetTag::train_lines);
    if (square || angled || lines37) tags.insert(SubsetTag::train_final);
  } else if (split == Split::test) {
    const bool square = mk == Marking::square20;
    const bool base_view = vc == ViewClass::base;
    tags.insert(SubsetTag::test_full);
    if (square && base_view) tags.insert(SubsetTag::test_base);
    if (base_view && (square || mk == Marking::resolution)) tags.insert(SubsetTag::test_resolutions);
    if (base_view && (square || mk == Marking::angled_grid)) tags.insert(SubsetTag::test_angled_grids);
    if (base_view && (square || mk == Marking::lines)) tags.insert(SubsetTag::test_lines);
    if (square && vc != ViewClass::accidental) tags.insert(SubsetTag::test_viewpoints);
    if (square && vc != ViewClass::novel) tags.insert(SubsetTag::test_acc_viewpoints);
    if (base_view) tags.insert(SubsetTag::test_general_grids);
    if (square) tags.insert(SubsetTag::test_general_views);
  }
  return tags;
}

std::vector<RenderJob> plan_dataset(const DatasetConfig& cfg) {
  cfg.validate();
  std::vector<RenderJob> jobs;
  auto split = [&](std::int64_t id) { return split_of(cfg.train, cfg.validation, cfg.test, id); };

  for (std::int64_t id = 0; id < cfg.function_count; ++id) {
    RenderJob f;
    f.kind = JobKind::function;
    f.function_id = id;
    f.path = function_path(id);
    f.split = split(id);
    jobs.push_back(f);
    for (const auto& v : cfg.depth_views) {
      RenderJob d;
      d.kind = JobKind::depth;
      d.function_id = id;
      d.view = v;
      d.path = depth_path(id, v);
      d.split = f.split;
      jobs.push_back(d);
    }
  }

  std::set<std::string> surface_paths;
  for (const auto& e : cfg.recipe) {
    std::vector<std::pair<const GridSpec*, const Viewpoint*>> combos;
    for (const auto& g : e.grids)
      for (const auto& v : e.views) combos.emplace_back(&g, &v);
    const auto n = static_cast<std::int64_t>(combos.size());
    for (std::int64_t id = std::max<std::int64_t>(0, e.functions.first);
         id <= e.functions.last && id < cfg.function_count; ++id) {
      std::vector<std::int64_t> picks;
      if (e.per_function == 0) {
        for (std::int64_t k = 0; k < n; ++k) picks.push_back(k);
      } else {
        for (int m = 0; m < e.per_function; ++m) picks.push_back((id * e.per_function + m) % n);
      }
      for (auto k : picks) {
        RenderJob s;
        s.kind = JobKind::surface;
        s.function_id = id;
        s.view = *combos[k].second;
        s.grid = *combos[k].first;
        s.path = surface_path(id, s.view, s.grid);
        s.depth_path = depth_path(id, s.view);
        s.split = split(id);
        s.tags = classify_surface(s.split, s.view, s.grid);
        if (!surface_paths.insert(s.path).second)
          throw RangeError("recipe '" + e.name + "' repeats surface " + s.path);
        jobs.push_back(std::move(s));
      }
    }
  }
  std::sort(jobs.begin(), jobs.end(), [](const RenderJob& a, const RenderJob& b) { return a.path < b.path; });
  return jobs;
}

DatasetManifest plan_manifest(const DatasetConfig& cfg) {
  DatasetManifest m;
  m.seed = cfg.seed;
  m.config_hash = cfg.hash();
  m.train = cfg.train;
  m.validation = cfg.validation;
  m.test = cfg.test;
  for (auto& job : plan_dataset(cfg)) {
    ManifestRecord r;
    static_cast<RenderJob&>(r) = std::move(job);
    m.records.push_back(std::move(r));
  }
  return m;
}

// ---------------------------------------------------------------------------
// Manifest serialization: one JSON object per line, header first.

std::size_t DatasetManifest::count(JobKind k) const {
  return static_cast<std::size_t>(
      std::count_if(records.begin(), records.end(), [k](const ManifestRecord& r) { return r.kind == k; }));
}

namespace {

json range_json(const FunctionRange& r) { return json::array({r.first, r.last}); }

FunctionRange range_parse(const json& j) { return {j.at(0).get<std::int64_t>(), j.at(1).get<std::int64_t>()}; }

}  // namespace

std::string DatasetManifest::serialize() const {
  std::string out;
  json header = {{"type", "header"},
                 {"format", "surfacegrid-manifest"},
                 {"version", 1},
                 {"seed", seed},
                 {"config_hash", config_hash},
                 {"splits", {{"train", range_json(train)}, {"validation", range_json(validation)}, {"test", range_json(test)}}},
                 {"counts",
                  {{"function", count(JobKind::function)},
                   {"depth", count(JobKind::depth)},
                   {"surface", count(JobKind::surface)}}}};
  out += header.dump() + "\n";
  for (const auto& r : records) {
    json j = {{"type", to_string(r.kind)},
              {"path", r.path},
              {"function_id", r.function_id},
              {"split", to_string(r.split)},
              {"checksum", r.checksum}};
    if (r.kind != JobKind::function)
      j["view"] = {{"radius", r.view.radius}, {"azimuth_deg", r.view.azimuth_deg}, {"elevation_deg", r.view.elevation_deg}};
    if (r.kind == JobKind::surface) {
      j["depth_path"] = r.depth_path;
      j["grid"] = {{"pattern", to_string(r.grid.pattern)}, {"spacing_u", r.grid.spacing_u},
                   {"spacing_v", r.grid.spacing_v},         {"line_width", r.grid.line_width},
                   {"angle_deg", r.grid.angle_deg},         {"draw_boundary", r.grid.draw_boundary}};
      json tags = json::array();
      for (auto t : r.tags.tags()) tags.push_back(to_string(t));
      j["tags"] = tags;
    }
    out += j.dump() + "\n";
  }
  return out;
}

std::string DatasetManifest::hash() const { return to_hex(hash_text(serialize())); }

DatasetManifest DatasetManifest::parse(const std::string& text, const std::string& source) {
  DatasetManifest m;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw FormatError(source, line_no, "json", e.what());
    }
    try {
      const auto type = j.at("type").get<std::string>();
      if (!have_header) {
        if (type != "header" || j.value("format", "") != "surfacegrid-manifest")
          throw FormatError(source, line_no, "type", "expected surfacegrid-manifest header");
        m.seed = j.at("seed").get<std::uint64_t>();
        m.config_hash = j.at("config_hash").get<std::string>();
        const auto& s = j.at("splits");
        m.train = range_parse(s.at("train"));
        m.validation = range_parse(s.at("validation"));
        m.test = range_parse(s.at("test"));
        have_header = true;
        continue;
      }
      ManifestRecord r;
      if (type == "function") r.kind = JobKind::function;
      else if (type == "depth") r.kind = JobKind::depth;
      else if (type == "surface") r.kind = JobKind::surface;
      else throw FormatError(source, line_no, "type", "unknown record type '" + type + "'");
      r.path = j.at("path").get<std::string>();
      r.function_id = j.at("function_id").get<std::int64_t>();
      const auto split = parse_split(j.at("split").get<std::string>());
      if (!split) throw FormatError(source, line_no, "split", "unknown split");
      r.split = *split;
      r.checksum = j.value("checksum", "");
      if (r.kind != JobKind::function) {
        const auto& v = j.at("view");
        r.view = {v.at("radius").get<double>(), v.at("azimuth_deg").get<double>(), v.at("elevation_deg").get<double>()};
      }
      if (r.kind == JobKind::surface) {
        r.depth_path = j.at("depth_path").get<std::string>();
        const auto& g = j.at("grid");
        const auto pattern = parse_line_pattern(g.at("pattern").get<std::string>());
        if (!pattern) throw FormatError(source, line_no, "grid.pattern", "unknown pattern");
        r.grid.pattern = *pattern;
        r.grid.spacing_u = g.at("spacing_u").get<double>();
        r.grid.spacing_v = g.at("spacing_v").get<double>();
        r.grid.line_width = g.at("line_width").get<double>();
        r.grid.angle_deg = g.at("angle_deg").get<double>();
        r.grid.draw_boundary = g.at("draw_boundary").get<bool>();
        for (const auto& t : j.at("tags")) {
          const auto tag = parse_subset_tag(t.get<std::string>());
          if (!tag) throw FormatError(source, line_no, "tags", "unknown tag '" + t.get<std::string>() + "'");
          r.tags.insert(*tag);
        }
      }
      m.records.push_back(std::move(r));
    } catch (const json::exception& e) {
      throw FormatError(source, line_no, "record", e.what());
    }
  }
  if (!have_header) throw FormatError(source, 1, "header", "empty manifest");
  return m;
}

void DatasetManifest::write(const std::filesystem::path& path) const { write_text_file(path, serialize()); }

DatasetManifest DatasetManifest::read(const std::filesystem::path& path) {
  return parse(read_text_file(path), path.string());
}

// ---------------------------------------------------------------------------

std::vector<std::string> check_manifest(const DatasetManifest& m) {
  std::vector<std::string> problems;
  if (m.train.overlaps(m.validation)) problems.push_back("train and validation function ranges overlap");
  if (m.train.overlaps(m.test)) problems.push_back("train and test function ranges overlap");
  if (m.validation.overlaps(m.test)) problems.push_back("validation and test function ranges overlap");

  std::map<std::string, const ManifestRecord*> depth_by_path;
  std::set<std::string> paths;
  for (const auto& r : m.records) {
    if (!paths.insert(r.path).second) problems.push_back("duplicate path " + r.path);
    if (r.kind == JobKind::depth) depth_by_path[r.path] = &r;
    const auto expected = split_of(m.train, m.validation, m.test, r.function_id);
    if (r.split != expected)
      problems.push_back(r.path + ": split " + to_string(r.split) + " but function " +
                         std::to_string(r.function_id) + " belongs to " + to_string(expected));
  }
  for (const auto& r : m.records) {
    if (r.kind != JobKind::surface) continue;
    const auto it = depth_by_path.find(r.depth_path);
    if (it == depth_by_path.end()) {
      problems.push_back(r.path + ": paired depth map " + r.depth_path + " missing");
      continue;
    }
    if (it->second->function_id != r.function_id || !(it->second->view == r.view))
      problems.push_back(r.path + ": paired depth map has a different function or viewpoint");
    if (!(r.tags == classify_surface(r.split, r.view, r.grid)))
      problems.push_back(r.path + ": tags disagree with its split, viewpoint and grid");
    for (auto t : r.tags.tags()) {
      if (is_training_tag(t) && r.split != Split::train && r.split != Split::validation)
        problems.push_back(r.path + ": training tag outside train/validation functions");
      if (is_test_tag(t) && r.split != Split::test)
        problems.push_back(r.path + ": test tag outside test functions");
    }
  }
  return problems;
}

// ---------------------------------------------------------------------------
// Subsets

std::vector<ImagePair> subset_pool(const DatasetManifest& m, SubsetTag tag, Split split) {
  std::vector<ImagePair> pool;
  for (const auto& r : m.records) {
    if (r.kind != JobKind::surface || r.split != split || !r.tags.contains(tag)) continue;
    pool.push_back({r.path, r.depth_path, r.function_id, r.view, r.grid});
  }
  std::sort(pool.begin(), pool.end(),
            [](const ImagePair& a, const ImagePair& b) { return a.surface_path < b.surface_path; });
  return pool;
}

namespace {

std::vector<ImagePair> sample(std::vector<ImagePair> pool, std::size_t size, std::uint64_t seed,
                              const std::string& stream, const std::string& what) {
  if (size > pool.size())
    throw RangeError(what + ": requested " + std::to_string(size) + " pairs but the pool holds " +
                     std::to_string(pool.size()));
  Rng rng(seed, hash_text(stream));
  for (std::size_t i = 0; i < size; ++i) {
    const auto j = i + static_cast<std::size_t>(rng.below(pool.size() - i));
    std::swap(pool[i], pool[j]);
  }
  pool.resize(size);
  return pool;
}

}  // namespace

std::vector<ImagePair> make_training_set(const DatasetManifest& m, SubsetTag variant, std::size_t size,
                                         std::uint64_t seed) {
  if (!is_training_tag(variant)) throw Error(to_string(variant) + " is not a training variant");
  return sample(subset_pool(m, variant, Split::train), size, seed, to_string(variant) + "/train",
                to_string(variant) + " training set");
}

std::vector<ImagePair> make_validation_set(const DatasetManifest& m, SubsetTag variant, std::size_t size,
                                           std::uint64_t seed) {
  if (!is_training_tag(variant)) throw Error(to_string(variant) + " is not a training variant");
  return sample(subset_pool(m, variant, Split::validation), size, seed, to_string(variant) + "/validation",
                to_string(variant) + " validation set");
}

std::vector<ImagePair> make_test_set(const DatasetManifest& m, SubsetTag tag, std::size_t size,
                                     std::uint64_t seed) {
  if (!is_test_tag(tag)) throw Error(to_string(tag) + " is not a test set");
  return sample(subset_pool(m, tag, Split::test), size, seed, to_string(tag) + "/test", to_string(tag));
}

}  // namespace surfacegrid
