#pragma once

#include <optional>
#include <string>

#include "surfacegrid/geometry.hpp"
#include "surfacegrid/image.hpp"

namespace surfacegrid {

enum class LinePattern { grid, lines_u, lines_v };

std::string to_string(LinePattern p);
std::optional<LinePattern> parse_line_pattern(const std::string& s);

/// Surface marking parameters. Spacings are the pattern periods (gap plus
/// line width); every length is measured in parameter space.
struct GridSpec {
  LinePattern pattern = LinePattern::grid;
  double spacing_u = 20.0;
  double spacing_v = 20.0;
  double line_width = 3.0;
  double angle_deg = 0.0;  // [0, 90)
  bool draw_boundary = true;

  void validate() const;
  bool operator==(const GridSpec&) const = default;
};

/// Whether world point (x, y) lies on a marking line. The pattern is rotated
/// by angle_deg about the domain center, with phase anchored at world
/// (0, 0) when unrotated. The boundary band is tested on the unrotated point.
bool line_mask(const GridSpec& g, double x, double y);

/// Marks the nearest fragment of each covered pixel: white iff line_mask
/// holds at the fragment's world (x, y). Body and background are black.
SurfaceImage mark_surface(const ViewRaster& raster, const GridSpec& g);

SurfaceImage render_surface(const FieldGrid& field, const Viewpoint& v, const GridSpec& g);

struct ThresholdMode {
  std::optional<double> fixed;  // normalized to [0, 1]; nullopt selects Otsu

  static ThresholdMode automatic() { return {}; }
  static ThresholdMode fixed_at(double t) { return {t}; }
};

/// Otsu (between-class variance) threshold over the image histogram.
/// Returns the largest level assigned to the dark class.
int otsu_threshold(const GrayImage& image);

/// Binarizes a scanned or published plot into white-on-black 512x512:
/// threshold, invert when more than half the pixels are white, nearest
/// neighbour resample. Throws Error("no structure") for constant images.
SurfaceImage binarize_real_plot(const GrayImage& image, ThresholdMode mode = ThresholdMode::automatic());

}  // namespace surfacegrid
