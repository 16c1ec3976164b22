#pragma once

#include <vector>

#include "surfacegrid/gauss_synth.hpp"
#include "surfacegrid/image.hpp"

namespace surfacegrid {

inline constexpr double kDefaultCameraRadius = 1024.0;
/// Half-range of the affine depth encoding, in pixels.
inline constexpr double kDepthHalfRange = 512.0;

struct Viewpoint {
  double radius = kDefaultCameraRadius;
  double azimuth_deg = 0.0;    // [0, 360)
  double elevation_deg = 0.0;  // [0, 90]

  void validate() const;
  bool operator==(const Viewpoint&) const = default;
};

struct Vec3 {
  double x = 0.0, y = 0.0, z = 0.0;

  friend Vec3 operator+(Vec3 a, Vec3 b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
  friend Vec3 operator-(Vec3 a, Vec3 b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
  friend Vec3 operator*(double s, Vec3 a) { return {s * a.x, s * a.y, s * a.z}; }
  friend double dot(Vec3 a, Vec3 b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
  bool operator==(const Vec3&) const = default;
};

/// Orthographic camera basis. `view` points from the scene toward the camera.
struct ProjectionFrame {
  Vec3 view;
  Vec3 right;
  Vec3 up;
  Vec3 center{256.0, 256.0, 0.0};
};

struct ImagePoint {
  double u = 0.0;      // column coordinate, pixels
  double v = 0.0;      // row coordinate, pixels
  double depth = 0.0;  // along `view`; larger is nearer the camera
};

/// sin and cos of an angle in degrees, exact at multiples of 90.
void sincos_deg(double deg, double& s, double& c);

ProjectionFrame frame_from_viewpoint(const Viewpoint& v);
ImagePoint project_point(const ProjectionFrame& frame, Vec3 p);

/// Affine depth encoding: 0.5 + depth / (2 * 512), clamped to [1/65535, 1].
double encode_depth(double depth_along);

/// Z-buffer of a tessellated heightfield. Pixel (row, col) samples image
/// point (col + 0.5, row + 0.5). For each covered pixel it keeps the nearest
/// fragment's depth and the world (x, y) of that fragment.
class ViewRaster {
 public:
  int width() const { return width_; }
  int height() const { return height_; }
  bool covered(int row, int col) const { return covered_[index(row, col)] != 0; }
  double depth_along(int row, int col) const { return depth_[index(row, col)]; }
  double world_x(int row, int col) const { return world_x_[index(row, col)]; }
  double world_y(int row, int col) const { return world_y_[index(row, col)]; }

  DepthMap depth_map() const;

  friend ViewRaster rasterize(const FieldGrid& field, const Viewpoint& v, int width, int height);

 private:
  std::size_t index(int row, int col) const { return static_cast<std::size_t>(row) * width_ + col; }

  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> covered_;
  std::vector<double> depth_;
  std::vector<double> world_x_;
  std::vector<double> world_y_;
};

/// Two triangles per unit cell, split along the diagonal whose corner
/// heights have the larger sum (ties are planar cells). Inclusive coverage
/// with canonical edge functions; nearest fragment wins, first drawn on ties.
/// Single-threaded and deterministic.
ViewRaster rasterize(const FieldGrid& field, const Viewpoint& v, int width = kDomainSize,
                     int height = kDomainSize);

DepthMap render_depth(const FieldGrid& field, const Viewpoint& v);

/// Renders several viewpoints of one field, one image per OpenMP task.
std::vector<DepthMap> render_depth_batch(const FieldGrid& field, const std::vector<Viewpoint>& views);
std::vector<DepthMap> render_depth_batch_serial(const FieldGrid& field,
                                                const std::vector<Viewpoint>& views);

}  // namespace surfacegrid
