#include <gtest/gtest.h>

#include <set>

#include "surfacegrid/error.hpp"
#include "surfacegrid/metrics.hpp"
#include "surfacegrid/rng.hpp"
#include "test_support.hpp"

using namespace surfacegrid;
namespace fs = std::filesystem;

namespace {

DepthMap from_values(int w, int h, std::vector<double> v) {
  DepthMap d(w, h);
  d.values = std::move(v);
  return d;
}

// truth k/16 and pred (7k mod 16)/16, k = 0..15 in row-major order
std::pair<DepthMap, DepthMap> permuted_pair() {
  std::vector<double> t, p;
  for (int k = 0; k < 16; ++k) {
    t.push_back(k / 16.0);
    p.push_back(((7 * k) % 16) / 16.0);
  }
  return {from_values(4, 4, p), from_values(4, 4, t)};
}

std::vector<SubsetTag> test_tags() {
  std::vector<SubsetTag> out;
  for (auto t : all_subset_tags())
    if (is_test_tag(t)) out.push_back(t);
  return out;
}

struct TinyDataset {
  fs::path root;
  DatasetManifest manifest;
};

const TinyDataset& tiny_dataset() {
  static const TinyDataset d = [] {
    TinyDataset t;
    t.root = test_support::scratch_dir("eval_dataset");
    t.manifest = build(DatasetConfig::tiny(), t.root).manifest;
    return t;
  }();
  return d;
}

}  // namespace

TEST(Msre, ZeroOnEquality) {
  const auto [p, t] = permuted_pair();
  EXPECT_EQ(msre(t, t), 0.0);
  EXPECT_EQ(mae(t, t), 0.0);
}

TEST(Msre, UniformOffset) {
  EXPECT_NEAR(msre(DepthMap(8, 8, 0.55), DepthMap(8, 8, 0.5)), 0.01, 1e-12);
}

TEST(Msre, RampAgainstItsMean) {
  // truth 0.1 + 0.05k, pred its mean 0.475:
  // sum (t - mean)^2 = 0.0025 * 340 = 0.85, sum t^2 = 4.46
  std::vector<double> t;
  for (int k = 0; k < 16; ++k) t.push_back(0.1 + 0.05 * k);
  EXPECT_NEAR(msre(DepthMap(4, 4, 0.475), from_values(4, 4, t)), 0.85 / 4.46, 1e-12);
}

TEST(Msre, PermutedPairHandOracle) {
  // sum of squared differences 608 / 256, sum of squares 1240 / 256
  const auto [p, t] = permuted_pair();
  EXPECT_NEAR(msre(p, t), 608.0 / 1240.0, 1e-12);
}

TEST(Msre, ScaleInvariant) {
  Rng rng(2, 2);
  DepthMap p(16, 16), t(16, 16);
  for (std::size_t k = 0; k < p.size(); ++k) {
    p.values[k] = rng.uniform01();
    t.values[k] = rng.uniform01();
  }
  auto scaled = [](DepthMap d, double c) {
    for (auto& v : d.values) v *= c;
    return d;
  };
  for (double c : {0.25, 3.0, 1e3}) EXPECT_NEAR(msre(scaled(p, c), scaled(t, c)), msre(p, t), 1e-12);
}

TEST(Msre, Errors) {
  EXPECT_THROW(msre(DepthMap(4, 4, 0.5), DepthMap(4, 5, 0.5)), Error);
  EXPECT_THROW(msre(DepthMap(4, 4, 0.5), DepthMap(4, 4, 0.0)), Error);
  EXPECT_THROW(mae(DepthMap(4, 4, 0.5), DepthMap(5, 4, 0.5)), Error);
}

TEST(Mae, UniformOffset) {
  EXPECT_NEAR(mae(DepthMap(8, 8, 0.6), DepthMap(8, 8, 0.5)), 0.1, 1e-12);
}

TEST(Mae, PermutedPairHandOracle) {
  // |k - (7k mod 16)| sums to 80, over 16 pixels, in units of 1/16
  const auto [p, t] = permuted_pair();
  EXPECT_NEAR(mae(p, t), 0.3125, 1e-15);
}

TEST(Metrics, ParallelMatchesSerial) {
  Rng rng(4, 4);
  DepthMap p(512, 512), t(512, 512);
  for (std::size_t k = 0; k < p.size(); ++k) {
    p.values[k] = rng.uniform01();
    t.values[k] = rng.uniform01();
  }
  // row-ordered partial sums vs a flat sum: equal up to rounding
  EXPECT_NEAR(msre(p, t), msre_serial(p, t), 1e-12 * msre_serial(p, t));
  EXPECT_NEAR(mae(p, t), mae_serial(p, t), 1e-12 * mae_serial(p, t));
  EXPECT_EQ(msre(p, t), msre(p, t));
}

TEST(RelativeImprovement, Values) {
  EXPECT_NEAR(relative_improvement(0.804, 0.183), 77.2, 0.05);
  EXPECT_EQ(relative_improvement(0.3, 0.3), 0.0);
  EXPECT_NEAR(relative_improvement(0.2, 0.4), -100.0, 1e-12);
  EXPECT_THROW(relative_improvement(0.0, 0.1), Error);
  EvalReport a{"test.Base", {}, 0.5, 0, ""}, b{"test.Lines", {}, 0.4, 0, ""};
  EXPECT_THROW(relative_improvement(a, b), Error);
}

TEST(EarlyStop, MonotoneDecreasingContinues) {
  std::vector<double> h;
  for (int k = 0; k < 300; ++k) h.push_back(1.0 / (k + 1));
  const auto d = early_stop(h);
  EXPECT_FALSE(d.stop());
  EXPECT_EQ(d.rollback_epoch, 299u);
}

TEST(EarlyStop, FiftyIncreasesAfterMinimumStop) {
  std::vector<double> h;
  for (int k = 0; k <= 10; ++k) h.push_back(10.0 - k);
  for (int k = 1; k <= 50; ++k) h.push_back(0.0 + k);
  const auto d = early_stop(h);
  EXPECT_TRUE(d.stop());
  EXPECT_EQ(d.rollback_epoch, 10u);
  h.pop_back();
  EXPECT_FALSE(early_stop(h).stop());
}

TEST(EarlyStop, OscillationNeverStops) {
  std::vector<double> h{0.0};
  for (int cycle = 0; cycle < 20; ++cycle) {
    for (int k = 0; k < 49; ++k) {
      h.push_back(h.back() + 1.0);
      ASSERT_FALSE(early_stop(h).stop());
    }
    h.push_back(h.back() - 100.0);
    ASSERT_FALSE(early_stop(h).stop());
  }
}

TEST(EarlyStop, PlateauBreaksTheRun) {
  std::vector<double> h{5.0};
  for (int k = 0; k < 60; ++k) h.push_back(h.back() + (k == 30 ? 0.0 : 1.0));
  EXPECT_FALSE(early_stop(h).stop());
  EXPECT_TRUE(early_stop(h, 29).stop());
  EXPECT_THROW(early_stop(std::vector<double>{}), Error);
}

TEST(Report, TableAndJsonl) {
  EvalReport r{"test.Full", {{"a.png", 0.002}, {"b.png", 0.004}}, 0.003, 2, "abc"};
  EXPECT_DOUBLE_EQ(report_mean(r), 0.003);
  const auto table = render_table({r});
  EXPECT_NE(table.find("Full"), std::string::npos);
  EXPECT_NE(table.find("0.300"), std::string::npos);
  const auto back = reports_from_jsonl(reports_to_jsonl({r}));
  ASSERT_EQ(back.size(), 1u);
  EXPECT_EQ(back[0].per_image, r.per_image);
  EXPECT_EQ(back[0].mean, r.mean);
  EXPECT_EQ(back[0].config_hash, "abc");
  const auto matrix = render_matrix({{"Baseline", {r}}, {"Lines", {}}});
  EXPECT_NE(matrix.find("Baseline"), std::string::npos);
  EXPECT_NE(matrix.find("-"), std::string::npos);
}

TEST(Evaluate, CopyOfTruthScoresZero) {
  const auto& ds = tiny_dataset();
  const auto pred = test_support::scratch_dir("eval_copy");
  fs::copy(ds.root / "depth", pred / "depth", fs::copy_options::recursive);
  const auto out = evaluate(pred, ds.root, ds.manifest, test_tags(), {2, 1, 0});
  EXPECT_TRUE(out.complete());
  EXPECT_EQ(out.reports.size(), test_tags().size());
  for (const auto& r : out.reports) {
    EXPECT_EQ(r.count, 2u);
    EXPECT_EQ(r.mean, 0.0);
    EXPECT_EQ(r.config_hash, ds.manifest.config_hash);
  }
}

TEST(Evaluate, ConstantPredictionMatchesOnePassOracle) {
  const auto& ds = tiny_dataset();
  const auto pred = test_support::scratch_dir("eval_const");
  const auto tags = std::vector<SubsetTag>{SubsetTag::test_full};
  const auto pairs = make_test_set(ds.manifest, SubsetTag::test_full, 3, 9);
  for (const auto& p : pairs) write_depth_png(DepthMap(512, 512, 0.5), pred / p.surface_path);

  // one pass over the raw 16-bit files; the ratio form lets the common
  // 1/65535 scale cancel
  double expected = 0.0;
  for (const auto& p : pairs) {
    const auto truth = read_gray_image(ds.root / p.depth_path);
    double num = 0.0, den = 0.0;
    for (auto q : truth.pixels) {
      const double e = 32768.0 - q;
      num += e * e;
      den += static_cast<double>(q) * q;
    }
    expected += num / den;
  }
  expected /= pairs.size();

  const auto out = evaluate(pred, ds.root, ds.manifest, tags, {3, 9, 0});
  ASSERT_EQ(out.reports.size(), 1u);
  EXPECT_NEAR(out.reports[0].mean, expected, 1e-12);
  EXPECT_EQ(out.reports[0].per_image.size(), 3u);
}

TEST(Evaluate, MissingPredictionsSkipSubset) {
  const auto& ds = tiny_dataset();
  const auto pred = test_support::scratch_dir("eval_missing");
  const auto out = evaluate(pred, ds.root, ds.manifest, {SubsetTag::test_base}, {2, 1, 0});
  EXPECT_FALSE(out.complete());
  EXPECT_TRUE(out.reports.empty());
  EXPECT_EQ(out.missing.size(), 2u);
}

TEST(Evaluate, DisjointSubsetsGiveDisjointLists) {
  auto m = tiny_dataset().manifest;
  // retag the four test surfaces into two disjoint pools
  int k = 0;
  for (auto& r : m.records) {
    if (r.kind != JobKind::surface || r.split != Split::test) continue;
    r.tags = {};
    r.tags.insert(k++ < 2 ? SubsetTag::test_base : SubsetTag::test_lines);
  }
  const auto pred = test_support::scratch_dir("eval_disjoint");
  fs::copy(tiny_dataset().root / "depth", pred / "depth", fs::copy_options::recursive);
  const auto out = evaluate(pred, tiny_dataset().root, m, {SubsetTag::test_base, SubsetTag::test_lines}, {2, 1, 0});
  ASSERT_EQ(out.reports.size(), 2u);
  std::set<std::string> a, b;
  for (const auto& [p, _] : out.reports[0].per_image) a.insert(p);
  for (const auto& [p, _] : out.reports[1].per_image) b.insert(p);
  for (const auto& p : a) EXPECT_FALSE(b.count(p));
}
