#pragma once

#include <png.h>

#include <algorithm>
#include <bit>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "gpdepth/core.hpp"
#include "gpdepth/geometry.hpp"

namespace gpdepth::io {

namespace detail {

inline std::uint32_t bswap32(std::uint32_t x) {
  return (x >> 24) | ((x >> 8) & 0x0000FF00u) | ((x << 8) & 0x00FF0000u) | (x << 24);
}

inline std::uint32_t to_little(std::uint32_t x) {
  return std::endian::native == std::endian::little ? x : bswap32(x);
}

inline void put_f32_le(std::ostream& os, float f) {
  const std::uint32_t bits = to_little(std::bit_cast<std::uint32_t>(f));
  char buf[4];
  std::memcpy(buf, &bits, 4);
  os.write(buf, 4);
}

inline std::string next_token(std::istream& is) {
  std::string tok;
  char c;
  while (is.get(c)) {
    if (c == '#') {
      std::string skip;
      std::getline(is, skip);
      continue;
    }
    if (std::isspace(static_cast<unsigned char>(c))) {
      if (!tok.empty()) return tok;
      continue;
    }
    tok.push_back(c);
    if (tok.size() > 64) break;
  }
  return tok;
}

inline std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw DataError("cannot open " + path.string());
  return is;
}

inline std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw DataError("cannot write " + path.string());
  return os;
}

}  // namespace detail

inline constexpr long long kMaxPixels = 1ll << 28;

// ---------------------------------------------------------------------------
// PFM depth: "Pf" single channel, negative scale = little endian, rows stored
// bottom-up. Non-positive and non-finite samples are invalid pixels.

inline DepthMap read_depth(std::istream& is) {
  if (detail::next_token(is) != "Pf") throw DataError("PFM: expected single-channel 'Pf' header");
  long long w = 0, h = 0;
  double scale = 0.0;
  try {
    w = std::stoll(detail::next_token(is));
    h = std::stoll(detail::next_token(is));
    scale = std::stod(detail::next_token(is));
  } catch (const std::exception&) {
    throw DataError("PFM: malformed header");
  }
  // The single whitespace after the scale has been consumed by next_token.
  if (w <= 0 || h <= 0 || scale == 0.0 || !std::isfinite(scale)) throw DataError("PFM: malformed header");
  if (w > kMaxPixels / h) throw DataError("PFM: dimensions overflow");
  const bool little = scale < 0.0;

  DepthMap d(static_cast<int>(w), static_cast<int>(h));
  std::vector<char> row(static_cast<std::size_t>(w) * 4);
  for (long long y = h - 1; y >= 0; --y) {
    if (!is.read(row.data(), static_cast<std::streamsize>(row.size()))) throw DataError("PFM: truncated data");
    for (long long x = 0; x < w; ++x) {
      std::uint32_t bits;
      std::memcpy(&bits, row.data() + x * 4, 4);
      const bool file_matches_host = little == (std::endian::native == std::endian::little);
      if (!file_matches_host) bits = detail::bswap32(bits);
      const float f = std::bit_cast<float>(bits);
      const std::size_t i = static_cast<std::size_t>(y) * w + x;
      d.values[i] = f;
      d.mask[i] = std::isfinite(f) && f > 0.0f;
    }
  }
  return d;
}

inline void write_depth(std::ostream& os, const DepthMap& d) {
  if (d.width <= 0 || d.height <= 0) throw DataError("PFM: empty depth map");
  os << "Pf\n" << d.width << ' ' << d.height << "\n-1.0\n";
  for (int y = d.height - 1; y >= 0; --y)
    for (int x = 0; x < d.width; ++x) {
      const std::size_t i = d.index(x, y);
      const double v = d.values[i];
      // Masked-out pixels must read back as invalid.
      const bool keep_raw = d.mask[i] || !(std::isfinite(v) && v > 0.0);
      detail::put_f32_le(os, keep_raw ? static_cast<float>(v) : 0.0f);
    }
  if (!os) throw DataError("PFM: write failed");
}

inline DepthMap read_depth(const std::filesystem::path& path) {
  auto is = detail::open_in(path);
  return read_depth(is);
}

inline void write_depth(const std::filesystem::path& path, const DepthMap& d) {
  auto os = detail::open_out(path);
  write_depth(os, d);
}

// ---------------------------------------------------------------------------
// 8-bit PNG color images. Gray inputs are replicated to RGB; 16-bit files are
// rejected.

inline std::uint8_t quantize(double v) {
  return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
}

inline Image read_image(const std::filesystem::path& path) {
  png_image png;
  std::memset(&png, 0, sizeof(png));
  png.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&png, path.string().c_str()))
    throw DataError("PNG: cannot read " + path.string() + ": " + png.message);
  if (png.format & PNG_FORMAT_FLAG_LINEAR) {
    png_image_free(&png);
    throw DataError("PNG: only 8-bit images are supported: " + path.string());
  }
  if (static_cast<long long>(png.width) * png.height > kMaxPixels) {
    png_image_free(&png);
    throw DataError("PNG: dimensions overflow");
  }
  png.format = PNG_FORMAT_RGB;
  std::vector<std::uint8_t> buf(PNG_IMAGE_SIZE(png));
  if (!png_image_finish_read(&png, nullptr, buf.data(), 0, nullptr))
    throw DataError("PNG: decode failed: " + std::string(png.message));
  Image img(static_cast<int>(png.width), static_cast<int>(png.height));
  for (std::size_t i = 0; i < buf.size(); ++i) img.rgb[i] = buf[i] / 255.0;
  return img;
}

inline std::vector<std::uint8_t> to_rgb8(const Image& img) {
  std::vector<std::uint8_t> buf(img.rgb.size());
  for (std::size_t i = 0; i < buf.size(); ++i) buf[i] = quantize(img.rgb[i]);
  return buf;
}

inline void write_png_rgb8(const std::filesystem::path& path, int width, int height,
                           const std::vector<std::uint8_t>& rgb, bool gray = false) {
  png_image png;
  std::memset(&png, 0, sizeof(png));
  png.version = PNG_IMAGE_VERSION;
  png.width = static_cast<png_uint_32>(width);
  png.height = static_cast<png_uint_32>(height);
  png.format = gray ? PNG_FORMAT_GRAY : PNG_FORMAT_RGB;
  if (!png_image_write_to_file(&png, path.string().c_str(), 0, rgb.data(), 0, nullptr))
    throw DataError("PNG: cannot write " + path.string() + ": " + png.message);
}

inline void write_image(const std::filesystem::path& path, const Image& img) {
  if (img.width <= 0 || img.height <= 0) throw DataError("PNG: empty image");
  write_png_rgb8(path, img.width, img.height, to_rgb8(img));
}

/// Binary mask as an 8-bit grayscale PNG (0 / 255).
inline void write_mask(const std::filesystem::path& path, const Mask& m, int width, int height) {
  std::vector<std::uint8_t> buf(m.size());
  for (std::size_t i = 0; i < m.size(); ++i) buf[i] = m[i] ? 255 : 0;
  write_png_rgb8(path, width, height, buf, true);
}

// ---------------------------------------------------------------------------
// Binary little-endian PLY with float xyz and uchar rgb.

inline void write_pointcloud(std::ostream& os, const PointCloud& cloud) {
  if (cloud.empty()) throw DataError("PLY: empty point cloud");
  os << "ply\nformat binary_little_endian 1.0\n"
     << "element vertex " << cloud.size() << "\n"
     << "property float x\nproperty float y\nproperty float z\n"
     << "property uchar red\nproperty uchar green\nproperty uchar blue\n"
     << "end_header\n";
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const auto& p = cloud.positions[i];
    detail::put_f32_le(os, static_cast<float>(p.x()));
    detail::put_f32_le(os, static_cast<float>(p.y()));
    detail::put_f32_le(os, static_cast<float>(p.z()));
    const auto& c = cloud.colors[i];
    const char rgb[3] = {static_cast<char>(quantize(c.x())), static_cast<char>(quantize(c.y())),
                         static_cast<char>(quantize(c.z()))};
    os.write(rgb, 3);
  }
  if (!os) throw DataError("PLY: write failed");
}

inline void write_pointcloud(const std::filesystem::path& path, const PointCloud& cloud) {
  auto os = detail::open_out(path);
  write_pointcloud(os, cloud);
}

}  // namespace gpdepth::io
