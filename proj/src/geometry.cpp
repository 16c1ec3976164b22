#include "surfacegrid/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "surfacegrid/error.hpp"

namespace surfacegrid {

void Viewpoint::validate() const {
  if (!(std::isfinite(radius) && radius > 0.0)) throw RangeError("camera radius must be positive");
  if (!(azimuth_deg >= 0.0 && azimuth_deg < 360.0)) throw RangeError("azimuth outside [0, 360)");
  if (!(elevation_deg >= 0.0 && elevation_deg <= 90.0))
    throw RangeError("elevation outside [0, 90]");
}

void sincos_deg(double deg, double& s, double& c) {
  const double q = std::floor(deg / 90.0);
  const double rem = deg - 90.0 * q;
  const double rad = rem * (std::numbers::pi / 180.0);
  const double s0 = rem == 0.0 ? 0.0 : std::sin(rad);
  const double c0 = rem == 0.0 ? 1.0 : std::cos(rad);
  switch (static_cast<long long>(q) & 3) {
    case 0: s = s0; c = c0; break;
    case 1: s = c0; c = -s0; break;
    case 2: s = -s0; c = -c0; break;
    default: s = -c0; c = s0; break;
  }
}

ProjectionFrame frame_from_viewpoint(const Viewpoint& v) {
  v.validate();
  double st, ct, sp, cp;
  sincos_deg(v.azimuth_deg, st, ct);
  sincos_deg(v.elevation_deg, sp, cp);
  ProjectionFrame f;
  f.view = {cp * ct, cp * st, sp};
  f.right = {-st, ct, 0.0};
  f.up = {-sp * ct, -sp * st, cp};
  return f;
}

ImagePoint project_point(const ProjectionFrame& frame, Vec3 p) {
  const Vec3 q = p - frame.center;
  return {dot(q, frame.right) + 256.0, 256.0 - dot(q, frame.up), dot(q, frame.view)};
}

double encode_depth(double depth_along) {
  return std::clamp(0.5 + depth_along / (2.0 * kDepthHalfRange), kDepthFloor, 1.0);
}

DepthMap ViewRaster::depth_map() const {
  DepthMap out(width_, height_);
  for (std::size_t k = 0; k < out.values.size(); ++k)
    out.values[k] = covered_[k] ? encode_depth(depth_[k]) : 0.0;
  return out;
}

namespace {

class TriangleRasterizer {
 public:
  TriangleRasterizer(const std::vector<double>& u, const std::vector<double>& v,
                     const std::vector<double>& z, const std::vector<double>& wx,
                     const std::vector<double>& wy, std::vector<std::uint8_t>& covered,
                     std::vector<double>& depth, std::vector<double>& out_x,
                     std::vector<double>& out_y, int width, int height)
      : u_(u), v_(v), z_(z), wx_(wx), wy_(wy), covered_(covered), depth_(depth), out_x_(out_x),
        out_y_(out_y), width_(width), height_(height) {}

  void draw(std::size_t p0, std::size_t p1, std::size_t p2) {
    const double umin = std::min({u_[p0], u_[p1], u_[p2]});
    const double umax = std::max({u_[p0], u_[p1], u_[p2]});
    const double vmin = std::min({v_[p0], v_[p1], v_[p2]});
    const double vmax = std::max({v_[p0], v_[p1], v_[p2]});
    const int c0 = std::max(0, static_cast<int>(std::ceil(umin - 0.5)));
    const int c1 = std::min(width_ - 1, static_cast<int>(std::floor(umax - 0.5)));
    const int r0 = std::max(0, static_cast<int>(std::ceil(vmin - 0.5)));
    const int r1 = std::min(height_ - 1, static_cast<int>(std::floor(vmax - 0.5)));
    for (int r = r0; r <= r1; ++r) {
      const double pv = r + 0.5;
      for (int c = c0; c <= c1; ++c) {
        const double pu = c + 0.5;
        const double e0 = edge(p1, p2, pu, pv);
        const double e1 = edge(p2, p0, pu, pv);
        const double e2 = edge(p0, p1, pu, pv);
        const bool inside = (e0 >= 0.0 && e1 >= 0.0 && e2 >= 0.0) ||
                            (e0 <= 0.0 && e1 <= 0.0 && e2 <= 0.0);
        if (!inside) continue;
        const double sum = e0 + e1 + e2;
        if (sum == 0.0) continue;
        const double z = (e0 * z_[p0] + e1 * z_[p1] + e2 * z_[p2]) / sum;
        const std::size_t k = static_cast<std::size_t>(r) * width_ + c;
        if (covered_[k] && !(z > depth_[k])) continue;
        covered_[k] = 1;
        depth_[k] = z;
        out_x_[k] = (e0 * wx_[p0] + e1 * wx_[p1] + e2 * wx_[p2]) / sum;
        out_y_[k] = (e0 * wy_[p0] + e1 * wy_[p1] + e2 * wy_[p2]) / sum;
      }
    }
  }

 private:
  // Evaluated in a fixed vertex order so that the two triangles sharing an
  // edge see exactly negated values: shared edges are watertight.
  double edge(std::size_t a, std::size_t b, double pu, double pv) const {
    if (a > b) return -edge(b, a, pu, pv);
    return (u_[b] - u_[a]) * (pv - v_[a]) - (v_[b] - v_[a]) * (pu - u_[a]);
  }

  const std::vector<double>& u_;
  const std::vector<double>& v_;
  const std::vector<double>& z_;
  const std::vector<double>& wx_;
  const std::vector<double>& wy_;
  std::vector<std::uint8_t>& covered_;
  std::vector<double>& depth_;
  std::vector<double>& out_x_;
  std::vector<double>& out_y_;
  int width_;
  int height_;
};

}  // namespace

ViewRaster rasterize(const FieldGrid& field, const Viewpoint& v, int width, int height) {
  if (field.width < 2 || field.height < 2) throw RangeError("field too small to tessellate");
  if (width <= 0 || height <= 0) throw RangeError("raster size must be positive");
  const auto frame = frame_from_viewpoint(v);

  const std::size_t n = field.values.size();
  std::vector<double> pu(n), pv(n), pz(n), wx(n), wy(n);
  for (int i = 0; i < field.height; ++i) {
    for (int j = 0; j < field.width; ++j) {
      const std::size_t k = static_cast<std::size_t>(i) * field.width + j;
      wx[k] = field.world_x(j);
      wy[k] = field.world_y(i);
      const auto ip = project_point(frame, {wx[k], wy[k], field.values[k]});
      pu[k] = ip.u;
      pv[k] = ip.v;
      pz[k] = ip.depth;
    }
  }

  ViewRaster out;
  out.width_ = width;
  out.height_ = height;
  const std::size_t pixels = static_cast<std::size_t>(width) * height;
  out.covered_.assign(pixels, 0);
  out.depth_.assign(pixels, 0.0);
  out.world_x_.assign(pixels, 0.0);
  out.world_y_.assign(pixels, 0.0);

  TriangleRasterizer tri(pu, pv, pz, wx, wy, out.covered_, out.depth_, out.world_x_,
                         out.world_y_, width, height);
  const auto& h = field.values;
  const std::size_t w = field.width;
  for (int i = 0; i + 1 < field.height; ++i) {
    for (std::size_t j = 0; j + 1 < w; ++j) {
      const std::size_t a = i * w + j, b = a + 1, c = a + w, d = c + 1;
      if (h[a] + h[d] >= h[b] + h[c]) {
        tri.draw(a, b, d);
        tri.draw(a, d, c);
      } else {
        tri.draw(a, b, c);
        tri.draw(b, d, c);
      }
    }
  }
  return out;
}

DepthMap render_depth(const FieldGrid& field, const Viewpoint& v) {
  return rasterize(field, v).depth_map();
}

std::vector<DepthMap> render_depth_batch(const FieldGrid& field, const std::vector<Viewpoint>& views) {
  std::vector<DepthMap> out(views.size());
  const auto count = static_cast<std::int64_t>(views.size());
#pragma omp parallel for schedule(dynamic, 1)
  for (std::int64_t k = 0; k < count; ++k) out[k] = render_depth(field, views[k]);
  return out;
}

std::vector<DepthMap> render_depth_batch_serial(const FieldGrid& field,
                                                const std::vector<Viewpoint>& views) {
  std::vector<DepthMap> out;
  out.reserve(views.size());
  for (const auto& v : views) out.push_back(render_depth(field, v));
  return out;
}

}  // namespace surfacegrid
