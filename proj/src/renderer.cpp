#include "surfacegrid/renderer.hpp"

#include <cmath>
#include <vector>

#include "surfacegrid/error.hpp"

namespace surfacegrid {

std::string to_string(LinePattern p) {
  switch (p) {
    case LinePattern::grid: return "grid";
    case LinePattern::lines_u: return "lines_u";
    case LinePattern::lines_v: return "lines_v";
  }
  return "grid";
}

std::optional<LinePattern> parse_line_pattern(const std::string& s) {
  if (s == "grid") return LinePattern::grid;
  if (s == "lines_u") return LinePattern::lines_u;
  if (s == "lines_v") return LinePattern::lines_v;
  return std::nullopt;
}

void GridSpec::validate() const {
  if (!(std::isfinite(line_width) && line_width > 0.0)) throw RangeError("line width must be positive");
  if (!(spacing_u > line_width) || !(spacing_v > line_width) || !std::isfinite(spacing_u) ||
      !std::isfinite(spacing_v))
    throw RangeError("line spacing must exceed line width");
  if (!(angle_deg >= 0.0 && angle_deg < 90.0)) throw RangeError("grid angle outside [0, 90)");
}

namespace {

inline double floor_mod(double a, double m) { return a - m * std::floor(a / m); }

}  // namespace

bool line_mask(const GridSpec& g, double x, double y) {
  if (g.draw_boundary) {
    const double far = kDomainSize - g.line_width;
    if (x < g.line_width || y < g.line_width || x > far || y > far) return true;
  }
  double xr = x, yr = y;
  if (g.angle_deg != 0.0) {
    double s, c;
    sincos_deg(g.angle_deg, s, c);
    const double dx = x - 256.0, dy = y - 256.0;
    xr = 256.0 + c * dx + s * dy;
    yr = 256.0 - s * dx + c * dy;
  }
  const bool on_u = floor_mod(xr, g.spacing_u) < g.line_width;
  const bool on_v = floor_mod(yr, g.spacing_v) < g.line_width;
  switch (g.pattern) {
    case LinePattern::grid: return on_u || on_v;
    case LinePattern::lines_u: return on_u;
    case LinePattern::lines_v: return on_v;
  }
  return false;
}

SurfaceImage mark_surface(const ViewRaster& raster, const GridSpec& g) {
  SurfaceImage out(raster.width(), raster.height());
  for (int r = 0; r < raster.height(); ++r)
    for (int c = 0; c < raster.width(); ++c)
      if (raster.covered(r, c) && line_mask(g, raster.world_x(r, c), raster.world_y(r, c)))
        out.at(r, c) = 1;
  return out;
}

SurfaceImage render_surface(const FieldGrid& field, const Viewpoint& v, const GridSpec& g) {
  g.validate();
  return mark_surface(rasterize(field, v), g);
}

int otsu_threshold(const GrayImage& image) {
  const int levels = image.max_value + 1;
  std::vector<double> hist(levels, 0.0);
  for (auto p : image.pixels) hist[p] += 1.0;
  const double total = static_cast<double>(image.pixels.size());
  double sum_all = 0.0;
  for (int k = 0; k < levels; ++k) sum_all += k * hist[k];

  double w0 = 0.0, sum0 = 0.0, best = -1.0;
  int best_t = -1;
  for (int t = 0; t < levels - 1; ++t) {
    w0 += hist[t];
    sum0 += t * hist[t];
    if (w0 == 0.0) continue;
    const double w1 = total - w0;
    if (w1 == 0.0) break;
    const double mean0 = sum0 / w0;
    const double mean1 = (sum_all - sum0) / w1;
    const double between = w0 * w1 * (mean0 - mean1) * (mean0 - mean1);
    if (between > best) {
      best = between;
      best_t = t;
    }
  }
  return best_t;
}

SurfaceImage binarize_real_plot(const GrayImage& image, ThresholdMode mode) {
  if (image.width <= 0 || image.height <= 0 || image.pixels.empty())
    throw Error("no structure: empty image");

  int threshold;
  if (mode.fixed) {
    if (!(*mode.fixed >= 0.0 && *mode.fixed <= 1.0)) throw RangeError("fixed threshold outside [0, 1]");
    threshold = static_cast<int>(std::floor(*mode.fixed * image.max_value));
  } else {
    threshold = otsu_threshold(image);
    if (threshold < 0) throw Error("no structure: image is constant");
  }

  std::size_t white = 0;
  for (auto p : image.pixels) white += p > threshold;
  if (white == 0 || white == image.pixels.size())
    throw Error("no structure: threshold leaves a single class");
  const bool invert = 2 * white > image.pixels.size();

  SurfaceImage out(kDomainSize, kDomainSize);
  for (int r = 0; r < kDomainSize; ++r) {
    const int sr = static_cast<int>((static_cast<std::int64_t>(2 * r + 1) * image.height) / (2 * kDomainSize));
    for (int c = 0; c < kDomainSize; ++c) {
      const int sc = static_cast<int>((static_cast<std::int64_t>(2 * c + 1) * image.width) / (2 * kDomainSize));
      const bool on = image.at(sr, sc) > threshold;
      out.at(r, c) = (on != invert) ? 1 : 0;
    }
  }
  return out;
}

}  // namespace surfacegrid
