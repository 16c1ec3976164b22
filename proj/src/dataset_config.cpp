#include <algorithm>
#include <array>
#include <cmath>
#include <set>

#include "surfacegrid/dataset.hpp"
#include "surfacegrid/error.hpp"
#include "surfacegrid/hash.hpp"

namespace surfacegrid {

using nlohmann::json;

namespace {

struct TagName {
  SubsetTag tag;
  const char* name;
};

constexpr std::array<TagName, kSubsetTagCount> kTagNames{{
    {SubsetTag::train_baseline, "train.Baseline"},
    {SubsetTag::train_viewpoints, "train.Viewpoints"},
    {SubsetTag::train_angled_grids, "train.AngledGrids"},
    {SubsetTag::train_lines, "train.Lines"},
    {SubsetTag::train_final, "train.Final"},
    {SubsetTag::test_base, "test.Base"},
    {SubsetTag::test_resolutions, "test.Resolutions"},
    {SubsetTag::test_angled_grids, "test.AngledGrids"},
    {SubsetTag::test_lines, "test.Lines"},
    {SubsetTag::test_viewpoints, "test.Viewpoints"},
    {SubsetTag::test_acc_viewpoints, "test.AccViewpoints"},
    {SubsetTag::test_full, "test.Full"},
    {SubsetTag::test_general_grids, "test.GeneralGrids"},
    {SubsetTag::test_general_views, "test.GeneralViews"},
}};

}  // namespace

std::string to_string(SubsetTag tag) { return kTagNames[static_cast<int>(tag)].name; }

std::optional<SubsetTag> parse_subset_tag(const std::string& name, bool prefer_training) {
  for (const auto& t : kTagNames)
    if (name == t.name) return t.tag;
  const std::string prefixed = (prefer_training ? "train." : "test.") + name;
  for (const auto& t : kTagNames)
    if (prefixed == t.name) return t.tag;
  const std::string other = (prefer_training ? "test." : "train.") + name;
  for (const auto& t : kTagNames)
    if (other == t.name) return t.tag;
  return std::nullopt;
}

bool is_training_tag(SubsetTag tag) { return tag <= SubsetTag::train_final; }
bool is_test_tag(SubsetTag tag) { return tag >= SubsetTag::test_base; }

const std::vector<SubsetTag>& all_subset_tags() {
  static const std::vector<SubsetTag> tags = [] {
    std::vector<SubsetTag> out;
    for (const auto& t : kTagNames) out.push_back(t.tag);
    return out;
  }();
  return tags;
}

std::vector<SubsetTag> TagSet::tags() const {
  std::vector<SubsetTag> out;
  for (auto t : all_subset_tags())
    if (contains(t)) out.push_back(t);
  return out;
}

std::string to_string(Split s) {
  switch (s) {
    case Split::train: return "train";
    case Split::validation: return "validation";
    case Split::test: return "test";
    case Split::none: break;
  }
  return "none";
}

std::optional<Split> parse_split(const std::string& s) {
  if (s == "train") return Split::train;
  if (s == "validation" || s == "val") return Split::validation;
  if (s == "test") return Split::test;
  if (s == "none") return Split::none;
  return std::nullopt;
}

std::string to_string(JobKind k) {
  switch (k) {
    case JobKind::function: return "function";
    case JobKind::depth: return "depth";
    case JobKind::surface: return "surface";
  }
  return "function";
}

// ---------------------------------------------------------------------------
// JSON conversion

namespace {

void require_keys(const json& j, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!j.is_object()) throw Error(where + ": expected an object");
  for (const auto& [key, _] : j.items()) {
    if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; }))
      throw Error(where + ": unknown field '" + key + "'");
  }
}

json view_to_json(const Viewpoint& v) {
  return {{"radius", v.radius}, {"azimuth_deg", v.azimuth_deg}, {"elevation_deg", v.elevation_deg}};
}

Viewpoint view_from_json(const json& j, const std::string& where) {
  require_keys(j, {"radius", "azimuth_deg", "elevation_deg"}, where);
  Viewpoint v;
  v.radius = j.value("radius", kDefaultCameraRadius);
  v.azimuth_deg = j.at("azimuth_deg").get<double>();
  v.elevation_deg = j.at("elevation_deg").get<double>();
  return v;
}

json grid_to_json(const GridSpec& g) {
  return {{"pattern", to_string(g.pattern)}, {"spacing_u", g.spacing_u}, {"spacing_v", g.spacing_v},
          {"line_width", g.line_width},       {"angle_deg", g.angle_deg}, {"draw_boundary", g.draw_boundary}};
}

GridSpec grid_from_json(const json& j, const std::string& where) {
  require_keys(j, {"pattern", "spacing", "spacing_u", "spacing_v", "line_width", "angle_deg", "draw_boundary"},
               where);
  GridSpec g;
  const auto pattern = j.value("pattern", std::string("grid"));
  const auto parsed = parse_line_pattern(pattern);
  if (!parsed) throw Error(where + ": unknown pattern '" + pattern + "'");
  g.pattern = *parsed;
  if (j.contains("spacing")) g.spacing_u = g.spacing_v = j.at("spacing").get<double>();
  g.spacing_u = j.value("spacing_u", g.spacing_u);
  g.spacing_v = j.value("spacing_v", g.spacing_v);
  g.line_width = j.value("line_width", g.line_width);
  g.angle_deg = j.value("angle_deg", g.angle_deg);
  g.draw_boundary = j.value("draw_boundary", g.draw_boundary);
  return g;
}

json range_to_json(const FunctionRange& r) { return json::array({r.first, r.last}); }

FunctionRange range_from_json(const json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 2) throw Error(where + ": expected [first, last]");
  return {j[0].get<std::int64_t>(), j[1].get<std::int64_t>()};
}

}  // namespace

json DatasetConfig::to_json() const {
  json views = json::array();
  for (const auto& v : depth_views) views.push_back(view_to_json(v));
  json entries = json::array();
  for (const auto& e : recipe) {
    json grids = json::array();
    for (const auto& g : e.grids) grids.push_back(grid_to_json(g));
    json ev = json::array();
    for (const auto& v : e.views) ev.push_back(view_to_json(v));
    entries.push_back({{"name", e.name},
                       {"grids", grids},
                       {"views", ev},
                       {"functions", range_to_json(e.functions)},
                       {"per_function", e.per_function}});
  }
  return {{"seed", seed},
          {"function_count", function_count},
          {"volume", volume},
          {"threads", threads},
          {"depth_views", views},
          {"recipe", entries},
          {"splits",
           {{"train", range_to_json(train)},
            {"validation", range_to_json(validation)},
            {"test", range_to_json(test)}}}};
}

DatasetConfig DatasetConfig::from_json(const json& j) {
  require_keys(j, {"seed", "function_count", "volume", "threads", "depth_views", "recipe", "splits"}, "config");
  DatasetConfig cfg = standard();
  try {
    if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("function_count")) cfg.function_count = j.at("function_count").get<std::int64_t>();
    if (j.contains("volume")) cfg.volume = j.at("volume").get<double>();
    if (j.contains("threads")) cfg.threads = j.at("threads").get<int>();
    if (j.contains("depth_views")) {
      cfg.depth_views.clear();
      for (const auto& v : j.at("depth_views")) cfg.depth_views.push_back(view_from_json(v, "depth_views"));
    }
    if (j.contains("recipe")) {
      cfg.recipe.clear();
      for (const auto& e : j.at("recipe")) {
        require_keys(e, {"name", "grids", "views", "functions", "per_function"}, "recipe entry");
        RecipeEntry entry;
        entry.name = e.value("name", std::string("entry") + std::to_string(cfg.recipe.size()));
        const auto where = "recipe '" + entry.name + "'";
        for (const auto& g : e.at("grids")) entry.grids.push_back(grid_from_json(g, where));
        if (e.contains("views")) {
          for (const auto& v : e.at("views")) entry.views.push_back(view_from_json(v, where));
        } else {
          entry.views = cfg.depth_views;
        }
        entry.functions = e.contains("functions") ? range_from_json(e.at("functions"), where)
                                                  : FunctionRange{0, cfg.function_count - 1};
        entry.per_function = e.value("per_function", 0);
        cfg.recipe.push_back(std::move(entry));
      }
    }
    if (j.contains("splits")) {
      const auto& s = j.at("splits");
      require_keys(s, {"train", "validation", "test"}, "splits");
      cfg.train = s.contains("train") ? range_from_json(s.at("train"), "splits.train") : FunctionRange{};
      cfg.validation =
          s.contains("validation") ? range_from_json(s.at("validation"), "splits.validation") : FunctionRange{};
      cfg.test = s.contains("test") ? range_from_json(s.at("test"), "splits.test") : FunctionRange{};
    }
  } catch (const json::exception& e) {
    throw Error(std::string("config: ") + e.what());
  }
  return cfg;
}

std::string DatasetConfig::hash() const {
  auto j = to_json();
  j.erase("threads");
  return to_hex(hash_text(j.dump()));
}

void DatasetConfig::validate() const {
  if (function_count < 1) throw RangeError("function_count must be at least 1");
  if (!(std::isfinite(volume) && volume > 0.0)) throw RangeError("volume must be positive");
  if (threads < 0) throw RangeError("threads must be non-negative");
  if (depth_views.empty()) throw RangeError("depth_views must not be empty");
  for (std::size_t k = 0; k < depth_views.size(); ++k) {
    depth_views[k].validate();
    for (std::size_t m = 0; m < k; ++m)
      if (depth_path(0, depth_views[m]) == depth_path(0, depth_views[k]))
        throw RangeError("duplicate depth viewpoint");
  }
  const FunctionRange all{0, function_count - 1};
  auto check_range = [&](const FunctionRange& r, const std::string& what) {
    if (!r.empty() && (r.first < all.first || r.last > all.last))
      throw RangeError(what + " range [" + std::to_string(r.first) + ", " + std::to_string(r.last) +
                       "] outside function ids [0, " + std::to_string(all.last) + "]");
  };
  check_range(train, "train");
  check_range(validation, "validation");
  check_range(test, "test");
  if (train.overlaps(validation) || train.overlaps(test) || validation.overlaps(test))
    throw RangeError("train, validation and test function ranges must be disjoint");

  std::set<std::string> names;
  for (const auto& e : recipe) {
    const auto where = "recipe '" + e.name + "'";
    if (e.grids.empty() || e.views.empty()) throw RangeError(where + ": needs grids and views");
    check_range(e.functions, where);
    for (const auto& g : e.grids) {
      try {
        g.validate();
      } catch (const RangeError& err) {
        throw RangeError(where + ": " + err.what());
      }
    }
    for (const auto& v : e.views) {
      v.validate();
      if (std::find(depth_views.begin(), depth_views.end(), v) == depth_views.end())
        throw RangeError(where + ": view (" + std::to_string(v.azimuth_deg) + ", " +
                         std::to_string(v.elevation_deg) + ") has no depth map");
    }
    const auto combos = static_cast<int>(e.grids.size() * e.views.size());
    if (e.per_function < 0 || e.per_function > combos)
      throw RangeError(where + ": per_function must be in [0, " + std::to_string(combos) + "]");
  }
}

// ---------------------------------------------------------------------------
// Built-in configurations

namespace {

Viewpoint view(double az, double el) { return {kDefaultCameraRadius, az, el}; }

GridSpec square_grid(double spacing, double angle = 0.0) {
  GridSpec g;
  g.spacing_u = g.spacing_v = spacing;
  g.angle_deg = angle;
  return g;
}

GridSpec lines_u(double spacing, double angle = 0.0) {
  GridSpec g = square_grid(spacing, angle);
  g.pattern = LinePattern::lines_u;
  return g;
}

std::vector<Viewpoint> octant_views() {
  std::vector<Viewpoint> out;
  for (double el : {0.0, 30.0, 60.0})
    for (double az : {0.0, 30.0, 60.0}) out.push_back(view(az, el));
  return out;
}

}  // namespace

DatasetConfig DatasetConfig::standard() {
  DatasetConfig cfg;
  cfg.seed = 1;
  cfg.function_count = 2000;
  cfg.depth_views = octant_views();
  cfg.depth_views.push_back(view(45.0, 22.5));

  const FunctionRange all{0, 1999};
  const FunctionRange held_out{1800, 1999};
  const auto octant = octant_views();
  const std::vector<Viewpoint> base_row{view(0, 30), view(30, 30), view(60, 30)};
  const std::vector<Viewpoint> novel{view(45.0, 22.5)};
  GridSpec anisotropic = square_grid(20.0);
  anisotropic.spacing_v = 28.0;

  cfg.recipe = {
      {"square-grids", {square_grid(20), square_grid(28), square_grid(37), square_grid(45)}, octant, all, 0},
      {"novel-view", {square_grid(20)}, novel, all, 0},
      {"lines-37", {lines_u(37)}, octant, all, 1},
      {"angled-grids", {square_grid(20, 30), square_grid(20, 60)}, octant, all, 1},
      {"angled-50", {square_grid(20, 50)}, base_row, held_out, 1},
      {"anisotropic", {anisotropic}, base_row, held_out, 1},
      {"combined", {lines_u(37), lines_u(37, 30)}, novel, held_out, 1},
  };
  return cfg;
}

DatasetConfig DatasetConfig::tiny() {
  DatasetConfig cfg;
  cfg.seed = 7;
  cfg.function_count = 5;
  cfg.depth_views = {view(30, 30), view(60, 30)};
  cfg.recipe = {{"tiny", {square_grid(20), square_grid(28)}, cfg.depth_views, {0, 4}, 0}};
  cfg.train = {0, 2};
  cfg.validation = {3, 3};
  cfg.test = {4, 4};
  return cfg;
}

}  // namespace surfacegrid
