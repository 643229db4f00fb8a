#pragma once

#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "gpdepth/core.hpp"
#include "gpdepth/geometry.hpp"
#include "gpdepth/scenes.hpp"
#include <unistd.h>

namespace gpdepth::testing {

inline DepthMap random_depth(int w, int h, std::uint64_t seed, double lo = 0.5, double hi = 10.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(lo, hi);
  std::vector<double> v(static_cast<std::size_t>(w) * h);
  for (auto& x : v) x = uni(rng);
  return DepthMap::from_values(w, h, std::move(v));
}

inline DepthMap depth_of(std::vector<double> v) {
  const int n = static_cast<int>(v.size());
  return DepthMap::from_values(n, 1, std::move(v));
}

inline Image random_image(int w, int h, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  Image img(w, h);
  for (auto& c : img.rgb) c = uni(rng);
  return img;
}

inline DepthMap constant_depth(int w, int h, double z) {
  return DepthMap::from_values(w, h, std::vector<double>(static_cast<std::size_t>(w) * h, z));
}

/// Quad facing the camera, centered on the optical axis at depth z.
inline Primitive front_quad(double z, double half, Texture tex = {}) {
  Primitive p;
  p.kind = PrimitiveKind::quad;
  p.center = Eigen::Vector3d(0.0, 0.0, z);
  p.half_extents = Eigen::Vector3d(half, half, 0.0);
  p.texture = tex;
  return p;
}

inline Scene single_primitive_scene(const Primitive& p, double fov = 60.0, int w = 64, int h = 64) {
  Scene s;
  s.primitives.push_back(p);
  s.fov_degrees = fov;
  s.width = w;
  s.height = h;
  return s;
}

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("gpdepth-test-" + tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

}  // namespace gpdepth::testing
