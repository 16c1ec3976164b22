#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

namespace surfacegrid {

/// Smallest encoded depth on a surface pixel; 0 is reserved for background.
inline constexpr double kDepthFloor = 1.0 / 65535.0;

/// Scalar depth image, row-major, values in [0, 1]. Rendered maps keep 0 for
/// background and [kDepthFloor, 1] on the surface; predictions are only
/// required to stay in [0, 1].
struct DepthMap {
  int width = 0;
  int height = 0;
  std::vector<double> values;

  DepthMap() = default;
  DepthMap(int w, int h, double fill = 0.0)
      : width(w), height(h), values(static_cast<std::size_t>(w) * h, fill) {}

  double at(int row, int col) const { return values[static_cast<std::size_t>(row) * width + col]; }
  double& at(int row, int col) { return values[static_cast<std::size_t>(row) * width + col]; }
  std::size_t size() const { return values.size(); }
};

/// Strictly binary image: 1 = white line, 0 = black.
struct SurfaceImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;

  SurfaceImage() = default;
  SurfaceImage(int w, int h) : width(w), height(h), pixels(static_cast<std::size_t>(w) * h, 0) {}

  std::uint8_t at(int row, int col) const { return pixels[static_cast<std::size_t>(row) * width + col]; }
  std::uint8_t& at(int row, int col) { return pixels[static_cast<std::size_t>(row) * width + col]; }
  double white_fraction() const;
  bool operator==(const SurfaceImage&) const = default;
};

/// Single-channel integer image as read from disk.
struct GrayImage {
  int width = 0;
  int height = 0;
  int max_value = 255;  // 255 or 65535
  std::vector<std::uint16_t> pixels;

  GrayImage() = default;
  GrayImage(int w, int h, int maxv = 255)
      : width(w), height(h), max_value(maxv), pixels(static_cast<std::size_t>(w) * h, 0) {}

  std::uint16_t at(int row, int col) const { return pixels[static_cast<std::size_t>(row) * width + col]; }
  std::uint16_t& at(int row, int col) { return pixels[static_cast<std::size_t>(row) * width + col]; }
};

// PNG (via libpng) and binary PGM. Readers accept any bit depth / color type
// and reduce to one gray channel; writers emit single-channel images.
GrayImage read_gray_image(const std::filesystem::path& path);
void write_gray_png(const GrayImage& image, const std::filesystem::path& path);
void write_gray_pgm(const GrayImage& image, const std::filesystem::path& path);

/// 16-bit PNG, value = round(65535 * v).
void write_depth_png(const DepthMap& depth, const std::filesystem::path& path);
DepthMap read_depth_png(const std::filesystem::path& path);
std::uint16_t quantize_depth(double v);

/// 8-bit PNG with values {0, 255}.
void write_surface_png(const SurfaceImage& image, const std::filesystem::path& path);
SurfaceImage read_surface_png(const std::filesystem::path& path);

}  // namespace surfacegrid
