#pragma once

#include <cstdint>
#include <filesystem>
#include <numbers>
#include <string>
#include <vector>

namespace surfacegrid {

/// Side length of the square parameter domain, in pixels.
inline constexpr int kDomainSize = 512;

/// Default volume under every component: a sigma=64 isotropic Gaussian
/// peaks at exactly 64 height-pixels.
inline constexpr double kDefaultVolume = 2.0 * std::numbers::pi * 64.0 * 64.0 * 64.0;

inline constexpr double kMinSigma = 8.0;
inline constexpr double kMaxSigma = 512.0;
inline constexpr int kMaxComponents = 10;

/// One rotated, anisotropic 2D Gaussian. Its amplitude is not stored; it is
/// derived from the function's volume so that every component encloses the
/// same absolute volume.
struct GaussianComponent {
  double mu_x = 0.0;
  double mu_y = 0.0;
  double sigma_x = 64.0;
  double sigma_y = 64.0;
  double rot = 0.0;  // radians, [0, pi)
  int sign = 1;      // +1 or -1

  /// Throws RangeError when any field is outside its documented range.
  void validate() const;

  double amplitude(double volume) const;
  double value_at(double x, double y, double volume) const;

  bool operator==(const GaussianComponent&) const = default;
};

struct SurfaceFunction {
  std::int64_t id = 0;
  std::vector<GaussianComponent> components;
  double volume = kDefaultVolume;

  void validate() const;

  /// G(x, y) at an arbitrary world point.
  double value_at(double x, double y) const;

  bool operator==(const SurfaceFunction&) const = default;
};

/// Row-major samples of G. Sample (i, j) sits at world
/// x = (j + 0.5) * step, y = (i + 0.5) * step with step = 512 / width.
struct FieldGrid {
  int width = 0;
  int height = 0;
  std::vector<double> values;

  double at(int i, int j) const { return values[static_cast<std::size_t>(i) * width + j]; }
  double& at(int i, int j) { return values[static_cast<std::size_t>(i) * width + j]; }
  double step_x() const { return static_cast<double>(kDomainSize) / width; }
  double step_y() const { return static_cast<double>(kDomainSize) / height; }
  double world_x(int j) const { return (j + 0.5) * step_x(); }
  double world_y(int i) const { return (i + 0.5) * step_y(); }
};

/// Pure function of (master_seed, id).
SurfaceFunction synth_function(std::uint64_t master_seed, std::int64_t id,
                               double volume = kDefaultVolume);

/// OpenMP over rows. Bit-identical to eval_function_serial.
FieldGrid eval_function(const SurfaceFunction& f, int width = kDomainSize,
                        int height = kDomainSize);
FieldGrid eval_function_serial(const SurfaceFunction& f, int width = kDomainSize,
                               int height = kDomainSize);

/// Rotates samples by +90 degrees about the domain center:
/// out(i, j) = in(n - 1 - j, i). Square grids only.
FieldGrid rot90(const FieldGrid& field);

// Text format, one component per line:
//
//   surfacegrid-function 1
//   function <id> components <n> volume <V0>
//   <mu_x> <mu_y> <sigma_x> <sigma_y> <rot> <sign>
//   ...
//
// Reals are written in shortest round-trip form; '#' starts a comment.
std::string format_function(const SurfaceFunction& f);
SurfaceFunction parse_function(const std::string& text, const std::string& source = "<memory>");
void save_function(const SurfaceFunction& f, const std::filesystem::path& path);
SurfaceFunction load_function(const std::filesystem::path& path);

}  // namespace surfacegrid
