#include <png.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>
#include <string>

#include "surfacegrid/error.hpp"
#include "surfacegrid/image.hpp"

namespace surfacegrid {

namespace fs = std::filesystem;

double SurfaceImage::white_fraction() const {
  if (pixels.empty()) return 0.0;
  std::size_t white = 0;
  for (auto p : pixels) white += p;
  return static_cast<double>(white) / static_cast<double>(pixels.size());
}

namespace {

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

[[noreturn]] void png_fail(png_structp png, png_const_charp msg) {
  auto* buf = static_cast<std::string*>(png_get_error_ptr(png));
  if (buf) *buf = msg;
  png_longjmp(png, 1);
}

void png_warn(png_structp, png_const_charp) {}

fs::path temp_sibling(const fs::path& path) {
  auto tmp = path;
  tmp += ".tmp";
  return tmp;
}

void write_png_rows(const fs::path& path, int width, int height, int bit_depth,
                    const std::vector<std::uint8_t>& bytes) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  const auto tmp = temp_sibling(path);
  {
    FilePtr fp(std::fopen(tmp.c_str(), "wb"));
    if (!fp) throw IoError("cannot write " + tmp.string());
    std::string message;
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, &message, png_fail, png_warn);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
      png_destroy_write_struct(&png, &info);
      throw IoError("libpng init failed");
    }
    const std::size_t stride = static_cast<std::size_t>(width) * (bit_depth / 8);
    std::vector<png_bytep> rows(height);
    for (int r = 0; r < height; ++r)
      rows[r] = const_cast<png_bytep>(bytes.data() + static_cast<std::size_t>(r) * stride);
    if (setjmp(png_jmpbuf(png))) {
      png_destroy_write_struct(&png, &info);
      throw IoError("png write failed for " + path.string() + ": " + message);
    }
    png_init_io(png, fp.get());
    png_set_IHDR(png, info, width, height, bit_depth, PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE,
                 PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_set_compression_level(png, 6);
    png_set_filter(png, 0, PNG_FILTER_NONE);
    png_write_info(png, info);
    png_write_image(png, rows.data());
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
    if (std::fflush(fp.get()) != 0) throw IoError("write failed: " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw IoError("cannot rename " + tmp.string() + ": " + ec.message());
}

GrayImage read_png(const fs::path& path, std::FILE* fp) {
  std::string message;
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, &message, png_fail, png_warn);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw IoError("libpng init failed");
  }
  GrayImage image;
  std::vector<std::uint8_t> bytes;
  std::vector<png_bytep> rows;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw IoError("cannot decode " + path.string() + ": " + message);
  }
  png_init_io(png, fp);
  png_read_info(png, info);
  const auto color = png_get_color_type(png, info);
  const int depth = png_get_bit_depth(png, info);
  if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  if (color & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
  if (color == PNG_COLOR_TYPE_RGB || color == PNG_COLOR_TYPE_RGB_ALPHA ||
      color == PNG_COLOR_TYPE_PALETTE)
    png_set_rgb_to_gray_fixed(png, 1, -1, -1);
  png_read_update_info(png, info);

  const int width = static_cast<int>(png_get_image_width(png, info));
  const int height = static_cast<int>(png_get_image_height(png, info));
  const int out_depth = png_get_bit_depth(png, info);
  const std::size_t stride = png_get_rowbytes(png, info);
  bytes.resize(stride * height);
  rows.resize(height);
  for (int r = 0; r < height; ++r) rows[r] = bytes.data() + static_cast<std::size_t>(r) * stride;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);

  image = GrayImage(width, height, out_depth == 16 ? 65535 : 255);
  for (int r = 0; r < height; ++r) {
    const std::uint8_t* row = rows[r];
    for (int c = 0; c < width; ++c) {
      if (out_depth == 16) {
        image.at(r, c) = static_cast<std::uint16_t>((row[2 * c] << 8) | row[2 * c + 1]);
      } else {
        image.at(r, c) = row[c];
      }
    }
  }
  return image;
}

GrayImage read_pgm(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::string magic;
  in >> magic;
  if (magic != "P5" && magic != "P2") throw IoError("not a PGM file: " + path.string());
  auto next_int = [&]() {
    while (in >> std::ws && in.peek() == '#') in.ignore(1 << 20, '\n');
    long v = -1;
    in >> v;
    if (!in || v < 0) throw IoError("bad PGM header in " + path.string());
    return v;
  };
  const long w = next_int(), h = next_int(), maxv = next_int();
  if (w <= 0 || h <= 0 || maxv <= 0 || maxv > 65535) throw IoError("bad PGM header in " + path.string());
  GrayImage img(static_cast<int>(w), static_cast<int>(h), maxv > 255 ? 65535 : 255);
  if (magic == "P2") {
    for (auto& p : img.pixels) p = static_cast<std::uint16_t>(next_int());
  } else {
    in.get();
    for (auto& p : img.pixels) {
      if (maxv > 255) {
        const int hi = in.get(), lo = in.get();
        p = static_cast<std::uint16_t>((hi << 8) | lo);
      } else {
        p = static_cast<std::uint16_t>(in.get());
      }
    }
    if (!in) throw IoError("truncated PGM data in " + path.string());
  }
  if (maxv != img.max_value) {
    for (auto& p : img.pixels)
      p = static_cast<std::uint16_t>(std::lround(static_cast<double>(p) * img.max_value / maxv));
  }
  return img;
}

}  // namespace

GrayImage read_gray_image(const fs::path& path) {
  FilePtr fp(std::fopen(path.c_str(), "rb"));
  if (!fp) throw IoError("cannot open " + path.string());
  unsigned char sig[8] = {};
  const auto got = std::fread(sig, 1, 8, fp.get());
  if (got == 8 && png_sig_cmp(sig, 0, 8) == 0) {
    std::rewind(fp.get());
    return read_png(path, fp.get());
  }
  if (got >= 2 && sig[0] == 'P' && (sig[1] == '5' || sig[1] == '2')) {
    fp.reset();
    return read_pgm(path);
  }
  throw IoError("unsupported image format: " + path.string());
}

void write_gray_png(const GrayImage& image, const fs::path& path) {
  const int depth = image.max_value > 255 ? 16 : 8;
  std::vector<std::uint8_t> bytes(image.pixels.size() * (depth / 8));
  for (std::size_t k = 0; k < image.pixels.size(); ++k) {
    if (depth == 16) {
      bytes[2 * k] = static_cast<std::uint8_t>(image.pixels[k] >> 8);
      bytes[2 * k + 1] = static_cast<std::uint8_t>(image.pixels[k] & 0xFF);
    } else {
      bytes[k] = static_cast<std::uint8_t>(image.pixels[k]);
    }
  }
  write_png_rows(path, image.width, image.height, depth, bytes);
}

void write_gray_pgm(const GrayImage& image, const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << "P5\n" << image.width << ' ' << image.height << '\n' << image.max_value << '\n';
  for (auto p : image.pixels) {
    if (image.max_value > 255) out.put(static_cast<char>(p >> 8));
    out.put(static_cast<char>(p & 0xFF));
  }
  if (!out) throw IoError("write failed: " + path.string());
}

std::uint16_t quantize_depth(double v) {
  if (!(v > 0.0)) return 0;
  if (v >= 1.0) return 65535;
  return static_cast<std::uint16_t>(std::lround(65535.0 * v));
}

void write_depth_png(const DepthMap& depth, const fs::path& path) {
  GrayImage img(depth.width, depth.height, 65535);
  for (std::size_t k = 0; k < depth.values.size(); ++k) img.pixels[k] = quantize_depth(depth.values[k]);
  write_gray_png(img, path);
}

DepthMap read_depth_png(const fs::path& path) {
  const auto img = read_gray_image(path);
  DepthMap depth(img.width, img.height);
  const double scale = 1.0 / img.max_value;
  for (std::size_t k = 0; k < img.pixels.size(); ++k) depth.values[k] = img.pixels[k] * scale;
  return depth;
}

void write_surface_png(const SurfaceImage& image, const fs::path& path) {
  std::vector<std::uint8_t> bytes(image.pixels.size());
  for (std::size_t k = 0; k < bytes.size(); ++k) bytes[k] = image.pixels[k] ? 255 : 0;
  write_png_rows(path, image.width, image.height, 8, bytes);
}

SurfaceImage read_surface_png(const fs::path& path) {
  const auto img = read_gray_image(path);
  SurfaceImage out(img.width, img.height);
  const int half = img.max_value / 2;
  for (std::size_t k = 0; k < img.pixels.size(); ++k) out.pixels[k] = img.pixels[k] > half ? 1 : 0;
  return out;
}

}  // namespace surfacegrid
