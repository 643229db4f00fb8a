#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace gpdepth {

// Error taxonomy. The CLI maps these onto exit codes.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
// Precondition violated by a caller (bad angle, bad intrinsics, ...).
struct DomainError : Error {
  using Error::Error;
};
// Malformed or inconsistent data (files, dimension mismatch, empty masks).
struct DataError : Error {
  using Error::Error;
};
// A rendered view has too little coverage to be useful.
struct DegenerateViewError : Error {
  using Error::Error;
};
// A depth provider failed to produce a map.
struct ProviderError : Error {
  using Error::Error;
};

inline constexpr double deg_to_rad(double deg) { return deg * std::numbers::pi / 180.0; }
inline constexpr double rad_to_deg(double rad) { return rad * 180.0 / std::numbers::pi; }

using Mask = std::vector<std::uint8_t>;

// Interleaved RGB image with channel values in [0,1].
struct Image {
  int width = 0;
  int height = 0;
  std::vector<double> rgb;

  Image() = default;
  Image(int w, int h, double fill = 0.0)
      : width(w), height(h), rgb(static_cast<std::size_t>(w) * h * 3, fill) {}

  std::size_t pixel_count() const { return static_cast<std::size_t>(width) * height; }
  double& at(int u, int v, int c) { return rgb[(static_cast<std::size_t>(v) * width + u) * 3 + c]; }
  double at(int u, int v, int c) const {
    return rgb[(static_cast<std::size_t>(v) * width + u) * 3 + c];
  }
};

// Per-pixel depth (z, not ray length) plus validity mask.
struct DepthMap {
  int width = 0;
  int height = 0;
  std::vector<double> values;
  Mask mask;

  DepthMap() = default;
  DepthMap(int w, int h)
      : width(w),
        height(h),
        values(static_cast<std::size_t>(w) * h, 0.0),
        mask(static_cast<std::size_t>(w) * h, 0) {}

  static DepthMap from_values(int w, int h, std::vector<double> v) {
    if (v.size() != static_cast<std::size_t>(w) * h) throw DataError("depth map size mismatch");
    DepthMap d(w, h);
    d.values = std::move(v);
    for (std::size_t i = 0; i < d.values.size(); ++i)
      d.mask[i] = std::isfinite(d.values[i]) && d.values[i] > 0.0;
    return d;
  }

  std::size_t pixel_count() const { return values.size(); }
  std::size_t index(int u, int v) const { return static_cast<std::size_t>(v) * width + u; }
  bool valid(int u, int v) const { return mask[index(u, v)] != 0; }
  double operator()(int u, int v) const { return values[index(u, v)]; }

  std::size_t count_valid() const {
    std::size_t n = 0;
    for (auto m : mask) n += m ? 1 : 0;
    return n;
  }

  // Throws unless every masked value is finite and positive.
  void validate() const {
    if (values.size() != static_cast<std::size_t>(width) * height || mask.size() != values.size())
      throw DataError("depth map storage does not match its dimensions");
    for (std::size_t i = 0; i < values.size(); ++i)
      if (mask[i] && !(std::isfinite(values[i]) && values[i] > 0.0))
        throw DataError("masked depth value is not finite and positive");
  }
};

inline Mask mask_and(const Mask& a, const Mask& b) {
  if (a.size() != b.size()) throw DataError("mask size mismatch");
  Mask out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = (a[i] && b[i]) ? 1 : 0;
  return out;
}

inline std::size_t mask_count(const Mask& m) {
  std::size_t n = 0;
  for (auto v : m) n += v ? 1 : 0;
  return n;
}

// Copy of `d` whose mask is further restricted to `keep`.
inline DepthMap restrict_mask(DepthMap d, const Mask& keep) {
  d.mask = mask_and(d.mask, keep);
  return d;
}

// splitmix64; used to derive independent seeds from (seed, index) pairs.
inline std::uint64_t mix_seed(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

inline std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) { return mix_seed(a ^ mix_seed(b)); }

// Uniform double in [0,1) from a 64-bit word; platform independent unlike
// std::uniform_real_distribution.
inline double unit_from_bits(std::uint64_t bits) {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

}  // namespace gpdepth
