#include <gtest/gtest.h>

#include <cmath>

#include "oracle/depth_oracle.hpp"
#include "surfacegrid/error.hpp"
#include "surfacegrid/renderer.hpp"
#include "surfacegrid/rng.hpp"
#include "test_support.hpp"

using namespace surfacegrid;

namespace {

FieldGrid zero_field() { return FieldGrid{512, 512, std::vector<double>(512 * 512, 0.0)}; }

// White fraction over covered pixels whose world point is outside the
// boundary band.
double interior_white_fraction(const ViewRaster& raster, const SurfaceImage& s, double band) {
  std::size_t n = 0, white = 0;
  for (int r = 0; r < raster.height(); ++r)
    for (int c = 0; c < raster.width(); ++c) {
      if (!raster.covered(r, c)) continue;
      const double x = raster.world_x(r, c), y = raster.world_y(r, c);
      if (x < band || y < band || x > 512 - band || y > 512 - band) continue;
      ++n;
      white += s.at(r, c);
    }
  return static_cast<double>(white) / n;
}

GridSpec grid(double su, double sv, double width = 3, double angle = 0) {
  GridSpec g;
  g.spacing_u = su;
  g.spacing_v = sv;
  g.line_width = width;
  g.angle_deg = angle;
  return g;
}

}  // namespace

TEST(LineMask, GridArithmetic) {
  const auto g = grid(20, 20);
  EXPECT_FALSE(line_mask(g, 10, 10));
  EXPECT_TRUE(line_mask(g, 21, 10));
  EXPECT_TRUE(line_mask(g, 10, 41.5));
  EXPECT_FALSE(line_mask(g, 23, 23));
}

TEST(LineMask, LinesU) {
  auto g = grid(37, 37);
  g.pattern = LinePattern::lines_u;
  EXPECT_TRUE(line_mask(g, 1, 100));
  EXPECT_TRUE(line_mask(g, 1, 250));
  EXPECT_FALSE(line_mask(g, 10, 10));
  EXPECT_TRUE(line_mask(g, 38, 200));
  EXPECT_FALSE(line_mask(g, 100, 38));
}

TEST(LineMask, BoundaryBand) {
  auto g = grid(20, 20);
  g.pattern = LinePattern::lines_u;
  EXPECT_TRUE(line_mask(g, 10, 1));
  EXPECT_TRUE(line_mask(g, 10, 510));
  g.draw_boundary = false;
  EXPECT_FALSE(line_mask(g, 10, 1));
}

TEST(LineMask, RotatedEqualsUnrotatedAtRotatedPoint) {
  // the boundary band is defined on the unrotated point
  auto rotated = grid(20, 20, 3, 30);
  rotated.draw_boundary = false;
  auto plain = rotated;
  plain.angle_deg = 0;
  Rng rng(30, 0);
  const double s = std::sin(-30 * M_PI / 180), c = std::cos(-30 * M_PI / 180);
  int agree = 0;
  for (int k = 0; k < 1000; ++k) {
    const double x = rng.uniform(3, 509), y = rng.uniform(3, 509);
    const double dx = x - 256, dy = y - 256;
    const double xr = 256 + c * dx - s * dy, yr = 256 + s * dx + c * dy;
    agree += line_mask(rotated, x, y) == line_mask(plain, xr, yr);
  }
  EXPECT_EQ(agree, 1000);
}

TEST(LineMask, GridIsUnionOfLines) {
  Rng rng(31, 0);
  for (double angle : {0.0, 30.0, 50.0, 60.0}) {
    auto g = grid(20, 28, 3, angle);
    auto u = g, v = g;
    u.pattern = LinePattern::lines_u;
    v.pattern = LinePattern::lines_v;
    for (int k = 0; k < 2000; ++k) {
      const double x = rng.uniform(0, 512), y = rng.uniform(0, 512);
      ASSERT_EQ(line_mask(g, x, y), line_mask(u, x, y) || line_mask(v, x, y));
    }
  }
}

TEST(GridSpec, Validate) {
  EXPECT_NO_THROW(grid(20, 20).validate());
  EXPECT_THROW(grid(3, 20).validate(), RangeError);
  EXPECT_THROW(grid(20, 20, 0).validate(), RangeError);
  EXPECT_THROW(grid(20, 20, 3, 90).validate(), RangeError);
  EXPECT_THROW(grid(20, 20, 3, -1).validate(), RangeError);
}

TEST(LinePattern, NamesRoundTrip) {
  for (auto p : {LinePattern::grid, LinePattern::lines_u, LinePattern::lines_v})
    EXPECT_EQ(parse_line_pattern(to_string(p)), p);
  EXPECT_FALSE(parse_line_pattern("dots").has_value());
}

TEST(RenderSurface, FlatTopDownGridCoverage) {
  const auto raster = rasterize(zero_field(), {1024, 0, 90});
  const auto s = mark_surface(raster, grid(20, 20));
  const double expected = 1 - (17.0 / 20) * (17.0 / 20);
  EXPECT_NEAR(interior_white_fraction(raster, s, 3), expected, 0.02 * expected);
}

TEST(RenderSurface, FlatTopDownLinesCoverage) {
  const auto raster = rasterize(zero_field(), {1024, 0, 90});
  auto g = grid(20, 20);
  g.pattern = LinePattern::lines_u;
  const auto s = mark_surface(raster, g);
  EXPECT_NEAR(interior_white_fraction(raster, s, 3), 3.0 / 20, 0.02 * 3.0 / 20);
}

TEST(RenderSurface, GridImageIsUnionOfLineImages) {
  const auto field = eval_function(synth_function(5, 5));
  const Viewpoint view{1024, 30, 30};
  auto g = grid(20, 20);
  auto u = g, v = g;
  u.pattern = LinePattern::lines_u;
  v.pattern = LinePattern::lines_v;
  const auto a = render_surface(field, view, g);
  const auto b = render_surface(field, view, u);
  const auto c = render_surface(field, view, v);
  for (std::size_t k = 0; k < a.pixels.size(); ++k) ASSERT_EQ(a.pixels[k], b.pixels[k] | c.pixels[k]);
}

TEST(RenderSurface, StrictlyBinary) {
  const auto s = render_surface(eval_function(synth_function(6, 1)), {1024, 60, 30}, grid(28, 28));
  for (auto p : s.pixels) EXPECT_TRUE(p == 0 || p == 1);
}

TEST(RenderSurface, BackgroundIsBlack) {
  const auto field = eval_function(synth_function(6, 2));
  const auto raster = rasterize(field, {1024, 30, 30});
  const auto s = mark_surface(raster, grid(20, 20));
  for (int r = 0; r < 512; ++r)
    for (int c = 0; c < 512; ++c)
      if (!raster.covered(r, c)) {
        ASSERT_EQ(s.at(r, c), 0);
      }
}

TEST(RenderSurface, OccludedLinesAreHidden) {
  // tall narrow bump: its near face hides part of the far slope
  SurfaceFunction f;
  f.components = {{256, 256, 30, 30, 0, 1}};
  const auto field = eval_function(f);
  const Viewpoint view{1024, 0, 30};
  const auto g = grid(20, 20);
  const auto s = render_surface(field, view, g);
  const auto hf = test_support::to_heightfield(field);

  // robustly off / on a line: same answer over a 1.5 px cross
  auto robust = [&](double x, double y, bool want) {
    for (auto [dx, dy] : {std::pair{0.0, 0.0}, {1.5, 0.0}, {-1.5, 0.0}, {0.0, 1.5}, {0.0, -1.5}})
      if (line_mask(g, x + dx, y + dy) != want) return false;
    return true;
  };

  Rng rng(40, 0);
  int checked = 0;
  for (int attempt = 0; attempt < 200000 && checked < 50; ++attempt) {
    const int r = 100 + static_cast<int>(rng.below(300)), c = 100 + static_cast<int>(rng.below(312));
    const auto hits = oracle::march(hf, {0, 30}, c + 0.5, r + 0.5);
    if (hits.size() < 2) continue;
    const auto& front = hits.front();
    // a hidden crossing on a line behind a visible fragment off any line
    bool hidden_line = false;
    for (std::size_t k = 1; k < hits.size(); ++k)
      hidden_line = hidden_line || (hits[k].depth < front.depth - 4 && robust(hits[k].x, hits[k].y, true));
    if (!hidden_line || !robust(front.x, front.y, false)) continue;
    ++checked;
    EXPECT_EQ(s.at(r, c), 0) << "pixel " << r << "," << c;
  }
  EXPECT_EQ(checked, 50);
}

TEST(Binarize, ConstantImageHasNoStructure) {
  GrayImage img(64, 64);
  try {
    binarize_real_plot(img);
    FAIL() << "expected Error";
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("no structure"), std::string::npos);
  }
  EXPECT_THROW(binarize_real_plot(GrayImage{}), Error);
}

TEST(Binarize, BlackLinesOnWhitePaper) {
  GrayImage img(512, 512);
  for (int r = 0; r < 512; ++r)
    for (int c = 0; c < 512; ++c) img.at(r, c) = (r % 20 < 2 || c % 20 < 2) ? 10 : 240;
  const auto out = binarize_real_plot(img);
  EXPECT_LT(out.white_fraction(), 0.5);
  EXPECT_EQ(out.at(0, 0), 1);
  EXPECT_EQ(out.at(10, 10), 0);
}

TEST(Binarize, InvertedGrayRenderRoundTrips) {
  const auto s = render_surface(eval_function(synth_function(8, 3)), {1024, 30, 30}, grid(20, 20));
  GrayImage img(512, 512);
  for (std::size_t k = 0; k < s.pixels.size(); ++k) {
    const double inverted = 1.0 - s.pixels[k];
    img.pixels[k] = static_cast<std::uint16_t>(std::lround(255 * (0.4 + 0.6 * inverted)));
  }
  EXPECT_EQ(binarize_real_plot(img), s);
  EXPECT_EQ(binarize_real_plot(img, ThresholdMode::fixed_at(0.7)), s);
}

TEST(Binarize, ResamplesToDomainSize) {
  GrayImage img(128, 96);
  for (int r = 0; r < 96; ++r)
    for (int c = 0; c < 128; ++c) img.at(r, c) = (c < 16) ? 255 : 0;
  const auto out = binarize_real_plot(img);
  EXPECT_EQ(out.width, 512);
  EXPECT_EQ(out.height, 512);
  EXPECT_EQ(out.at(300, 63), 1);
  EXPECT_EQ(out.at(300, 64), 0);
}

TEST(Binarize, FixedThresholdRange) {
  GrayImage img(8, 8);
  img.at(0, 0) = 200;
  EXPECT_THROW(binarize_real_plot(img, ThresholdMode::fixed_at(1.5)), RangeError);
}

TEST(Otsu, SeparatesTwoLevels) {
  GrayImage img(10, 10);
  for (std::size_t k = 0; k < img.pixels.size(); ++k) img.pixels[k] = k < 30 ? 40 : 200;
  const int t = otsu_threshold(img);
  EXPECT_GE(t, 40);
  EXPECT_LT(t, 200);
  EXPECT_EQ(otsu_threshold(GrayImage(4, 4)), -1);
}
