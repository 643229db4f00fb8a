#pragma once

#include <nlohmann/json.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "gpdepth/core.hpp"
#include "gpdepth/depthnorm.hpp"
#include "gpdepth/geometry.hpp"
#include "gpdepth/provider.hpp"
#include "gpdepth/renderer.hpp"

namespace gpdepth {

// ---------------------------------------------------------------------------
// Analytic scenes: textured quads and boxes with closed-form ray casting. They
// provide exact depth and color at any camera pose.

enum class Pattern { solid, checker, stripes };

struct Texture {
  Pattern pattern = Pattern::checker;
  double period = 0.5;    // scene units
  double contrast = 0.15; // fraction of the base color removed on dark cells
  Eigen::Vector3d color{0.6, 0.6, 0.6};
};

enum class PrimitiveKind { quad, box };

/// Quads lie in their local z = 0 plane with |x| <= hx, |y| <= hy; boxes span
/// |x|,|y|,|z| <= half extents. `rotation` maps local to camera coordinates.
struct Primitive {
  PrimitiveKind kind = PrimitiveKind::quad;
  Eigen::Vector3d center = Eigen::Vector3d::Zero();
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
  Eigen::Vector3d half_extents{1.0, 1.0, 1.0};
  Texture texture;
};

struct Scene {
  std::vector<Primitive> primitives;
  std::uint64_t seed = 0;
  // Default camera the scene was generated for.
  double fov_degrees = 60.0;
  int width = 128;
  int height = 128;

  CameraIntrinsics default_camera() const { return camera_from_fov(fov_degrees, width, height); }
};

namespace detail {

inline double texture_value(const Texture& tex, double s, double t) {
  switch (tex.pattern) {
    case Pattern::solid:
      return 1.0;
    case Pattern::checker: {
      const long long parity = static_cast<long long>(std::floor(s / tex.period)) +
                               static_cast<long long>(std::floor(t / tex.period));
      return (parity & 1) ? 1.0 - tex.contrast : 1.0;
    }
    case Pattern::stripes:
      return 1.0 - tex.contrast * 0.5 * (1.0 + std::sin(2.0 * std::numbers::pi * s / tex.period));
  }
  return 1.0;
}

inline constexpr std::array<double, 6> kFaceShade{1.0, 0.9, 0.82, 0.95, 0.86, 0.78};

struct Hit {
  double s = std::numeric_limits<double>::infinity();
  Eigen::Vector3d color = Eigen::Vector3d::Zero();
};

// Ray o + s d in camera coordinates of the scene's reference frame.
inline bool intersect(const Primitive& p, const Eigen::Vector3d& o_local, const Eigen::Vector3d& d_local,
                      double s_min, Hit& best) {
  const auto& h = p.half_extents;
  if (p.kind == PrimitiveKind::quad) {
    if (d_local.z() == 0.0) return false;
    const double s = -o_local.z() / d_local.z();
    if (!(s > s_min) || !(s < best.s)) return false;
    const Eigen::Vector3d q = o_local + s * d_local;
    if (std::abs(q.x()) > h.x() || std::abs(q.y()) > h.y()) return false;
    best.s = s;
    best.color = p.texture.color * texture_value(p.texture, q.x(), q.y());
    return true;
  }

  double t_near = -std::numeric_limits<double>::infinity();
  double t_far = std::numeric_limits<double>::infinity();
  int axis_near = 0, axis_far = 0;
  for (int k = 0; k < 3; ++k) {
    if (d_local[k] == 0.0) {
      if (std::abs(o_local[k]) > h[k]) return false;
      continue;
    }
    double t0 = (-h[k] - o_local[k]) / d_local[k];
    double t1 = (h[k] - o_local[k]) / d_local[k];
    if (t0 > t1) std::swap(t0, t1);
    if (t0 > t_near) {
      t_near = t0;
      axis_near = k;
    }
    if (t1 < t_far) {
      t_far = t1;
      axis_far = k;
    }
  }
  if (t_near > t_far) return false;
  double s = t_near;
  int axis = axis_near;
  if (!(s > s_min)) {
    s = t_far;
    axis = axis_far;
  }
  if (!(s > s_min) || !(s < best.s)) return false;
  const Eigen::Vector3d q = o_local + s * d_local;
  const int a = (axis + 1) % 3, b = (axis + 2) % 3;
  const int face = 2 * axis + (q[axis] > 0.0 ? 1 : 0);
  best.s = s;
  best.color = p.texture.color * texture_value(p.texture, q[a], q[b]) * kFaceShade[face];
  return true;
}

}  // namespace detail

struct OracleView {
  DepthMap depth;
  Image image;
};

/// Ray casts every pixel of the camera placed at `vt` (a transform taking the
/// reference frame into the viewing frame). Depth is z in the viewing frame;
/// missed pixels are invalid and black.
inline OracleView oracle_render(const Scene& scene, const CameraIntrinsics& cam, const ViewTransform& vt = {}) {
  const int W = cam.width(), H = cam.height();
  OracleView out{DepthMap(W, H), Image(W, H, 0.0)};
  // Camera center and ray directions expressed in the reference frame.
  const Eigen::Matrix3d Rt = vt.R.transpose();
  const Eigen::Vector3d origin = -Rt * vt.offset();

  struct Local {
    Eigen::Matrix3d to_local;  // local-from-view for directions
    Eigen::Vector3d origin;
  };
  std::vector<Local> locals;
  locals.reserve(scene.primitives.size());
  for (const auto& p : scene.primitives)
    locals.push_back({p.rotation.transpose() * Rt, p.rotation.transpose() * (origin - p.center)});

  for (int v = 0; v < H; ++v) {
    for (int u = 0; u < W; ++u) {
      const Eigen::Vector3d dir((u - cam.u0()) / cam.f(), (v - cam.v0()) / cam.f(), 1.0);
      detail::Hit hit;
      for (std::size_t k = 0; k < scene.primitives.size(); ++k)
        detail::intersect(scene.primitives[k], locals[k].origin, locals[k].to_local * dir, kNearClip, hit);
      if (!std::isfinite(hit.s)) continue;
      const std::size_t i = out.depth.index(u, v);
      // dir has unit z, so the ray parameter is the view-frame depth.
      out.depth.values[i] = hit.s;
      out.depth.mask[i] = 1;
      for (int c = 0; c < 3; ++c) out.image.at(u, v, c) = std::clamp(hit.color[c], 0.0, 1.0);
    }
  }
  return out;
}

inline DepthMap oracle_depth(const Scene& scene, const CameraIntrinsics& cam, const ViewTransform& vt = {}) {
  return oracle_render(scene, cam, vt).depth;
}

inline Image oracle_image(const Scene& scene, const CameraIntrinsics& cam, const ViewTransform& vt = {}) {
  return oracle_render(scene, cam, vt).image;
}

/// The same scene with every primitive moved by `vt`, so that the identity
/// oracle of the result equals the oracle of the original at `vt`.
inline Scene transform_scene(const Scene& scene, const ViewTransform& vt) {
  Scene out = scene;
  for (auto& p : out.primitives) {
    p.center = vt.apply(p.center);
    p.rotation = vt.R * p.rotation;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Generators.

namespace detail {

inline Primitive ground(double height, double z_near, double z_far, double half_width, const Texture& tex) {
  Primitive p;
  p.kind = PrimitiveKind::quad;
  p.center = Eigen::Vector3d(0.0, height, 0.5 * (z_near + z_far));
  p.rotation = rotation_x(std::numbers::pi / 2);  // local y runs along camera z
  p.half_extents = Eigen::Vector3d(half_width, 0.5 * (z_far - z_near), 0.0);
  p.texture = tex;
  return p;
}

inline Primitive wall(double z, double y_top, double y_bottom, double half_width, const Texture& tex) {
  Primitive p;
  p.kind = PrimitiveKind::quad;
  p.center = Eigen::Vector3d(0.0, 0.5 * (y_top + y_bottom), z);
  p.half_extents = Eigen::Vector3d(half_width, 0.5 * (y_bottom - y_top), 0.0);
  p.texture = tex;
  return p;
}

inline Primitive box(const Eigen::Vector3d& center, const Eigen::Vector3d& half, double yaw, const Texture& tex) {
  Primitive p;
  p.kind = PrimitiveKind::box;
  p.center = center;
  p.rotation = rotation_y(yaw);
  p.half_extents = half;
  p.texture = tex;
  return p;
}

}  // namespace detail

/// Fixed scene used to calibrate loss thresholds: checkered ground, one box
/// and a striped back wall, FOV 60 at 128x128.
inline Scene calibration_scene() {
  Scene s;
  s.seed = 0;
  s.primitives.push_back(
      detail::ground(1.0, 1.5, 8.5, 6.0, Texture{Pattern::checker, 0.5, 0.15, {0.55, 0.5, 0.4}}));
  s.primitives.push_back(detail::wall(8.0, -5.0, 1.0, 7.0, Texture{Pattern::stripes, 0.7, 0.2, {0.4, 0.5, 0.6}}));
  s.primitives.push_back(detail::box({0.4, 0.5, 5.5}, {0.5, 0.5, 0.5}, deg_to_rad(25.0),
                                     Texture{Pattern::checker, 0.25, 0.15, {0.7, 0.35, 0.3}}));
  return s;
}

/// Random ground + back wall + 1..3 boxes resting on the ground.
inline Scene random_scene(std::uint64_t seed, double fov_degrees = 60.0, int width = 128, int height = 128) {
  std::mt19937_64 rng(mix_seed(seed, 0x5ce9e));
  auto uni = [&](double lo, double hi) { return lo + (hi - lo) * unit_from_bits(rng()); };
  auto color = [&] { return Eigen::Vector3d(uni(0.3, 0.85), uni(0.3, 0.85), uni(0.3, 0.85)); };

  Scene s;
  s.seed = seed;
  s.fov_degrees = fov_degrees;
  s.width = width;
  s.height = height;

  const double h = uni(0.8, 1.4);
  const double zw = uni(6.0, 11.0);
  s.primitives.push_back(detail::ground(h, 0.8, zw + 0.5, 3.0 * zw, Texture{Pattern::checker, uni(0.3, 0.8), uni(0.1, 0.2), color()}));
  s.primitives.push_back(
      detail::wall(zw, h - 4.0 * zw, h, 3.0 * zw, Texture{Pattern::stripes, uni(0.4, 1.0), uni(0.1, 0.25), color()}));

  const int n_boxes = 1 + static_cast<int>(uni(0.0, 3.0));
  for (int k = 0; k < n_boxes; ++k) {
    const Eigen::Vector3d half(uni(0.25, 0.7), uni(0.25, 0.7), uni(0.25, 0.7));
    const double z = uni(2.5, zw - 1.5);
    const double x = uni(-0.3, 0.3) * z;
    s.primitives.push_back(detail::box({x, h - half.y(), z}, half, uni(0.0, std::numbers::pi / 2),
                                       Texture{Pattern::checker, uni(0.15, 0.4), uni(0.1, 0.2), color()}));
  }
  return s;
}

// ---------------------------------------------------------------------------
// JSON (de)serialization.

inline const char* to_string(Pattern p) {
  switch (p) {
    case Pattern::solid: return "solid";
    case Pattern::checker: return "checker";
    case Pattern::stripes: return "stripes";
  }
  return "solid";
}

inline Pattern pattern_from_string(const std::string& s) {
  if (s == "solid") return Pattern::solid;
  if (s == "checker") return Pattern::checker;
  if (s == "stripes") return Pattern::stripes;
  throw DataError("unknown texture pattern: " + s);
}

namespace detail {

inline nlohmann::json vec_json(const Eigen::Vector3d& v) { return {v.x(), v.y(), v.z()}; }

inline Eigen::Vector3d json_vec(const nlohmann::json& j) {
  if (!j.is_array() || j.size() != 3) throw DataError("scene: expected a 3-vector");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

}  // namespace detail

inline nlohmann::json scene_to_json(const Scene& s) {
  nlohmann::json prims = nlohmann::json::array();
  for (const auto& p : s.primitives) {
    nlohmann::json rot = nlohmann::json::array();
    for (int r = 0; r < 3; ++r) rot.push_back({p.rotation(r, 0), p.rotation(r, 1), p.rotation(r, 2)});
    prims.push_back({{"kind", p.kind == PrimitiveKind::quad ? "quad" : "box"},
                     {"center", detail::vec_json(p.center)},
                     {"rotation", rot},
                     {"half_extents", detail::vec_json(p.half_extents)},
                     {"texture",
                      {{"pattern", to_string(p.texture.pattern)},
                       {"period", p.texture.period},
                       {"contrast", p.texture.contrast},
                       {"color", detail::vec_json(p.texture.color)}}}});
  }
  return {{"seed", s.seed},
          {"camera", {{"fov_degrees", s.fov_degrees}, {"width", s.width}, {"height", s.height}}},
          {"primitives", prims}};
}

inline Scene scene_from_json(const nlohmann::json& j) {
  try {
    Scene s;
    s.seed = j.value("seed", std::uint64_t{0});
    if (j.contains("camera")) {
      const auto& c = j.at("camera");
      s.fov_degrees = c.value("fov_degrees", 60.0);
      s.width = c.value("width", 128);
      s.height = c.value("height", 128);
    }
    for (const auto& pj : j.at("primitives")) {
      Primitive p;
      const auto kind = pj.at("kind").get<std::string>();
      if (kind == "quad")
        p.kind = PrimitiveKind::quad;
      else if (kind == "box")
        p.kind = PrimitiveKind::box;
      else
        throw DataError("scene: unknown primitive kind " + kind);
      p.center = detail::json_vec(pj.at("center"));
      if (pj.contains("rotation")) {
        const auto& rj = pj.at("rotation");
        for (int r = 0; r < 3; ++r) p.rotation.row(r) = detail::json_vec(rj.at(r)).transpose();
      }
      p.half_extents = detail::json_vec(pj.at("half_extents"));
      if (pj.contains("texture")) {
        const auto& tj = pj.at("texture");
        p.texture.pattern = pattern_from_string(tj.value("pattern", std::string("checker")));
        p.texture.period = tj.value("period", 0.5);
        p.texture.contrast = tj.value("contrast", 0.15);
        if (tj.contains("color")) p.texture.color = detail::json_vec(tj.at("color"));
      }
      if (!(p.texture.period > 0.0)) throw DataError("scene: texture period must be positive");
      s.primitives.push_back(p);
    }
    if (s.primitives.empty()) throw DataError("scene: no primitives");
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("scene: malformed JSON: ") + e.what());
  }
}

// ---------------------------------------------------------------------------
// Oracle depth provider.

struct OracleMode {
  enum class Kind { exact, distorted, noisy };
  Kind kind = Kind::exact;
  AffineCoeffs distortion;  // distorted: a * D + b
  double noise_sigma = 0.0; // noisy: D * (1 + sigma * N(0,1))

  static OracleMode exact() { return {}; }
  static OracleMode distorted(double a, double b) { return {Kind::distorted, {a, b}, 0.0}; }
  static OracleMode noisy(double sigma) { return {Kind::noisy, {}, sigma}; }
};

/// Answers depth queries with the analytic scene depth at the pose recorded
/// for the queried render id. The recorded shift is relative to the cloud's
/// nearest depth and is re-expressed against the scene's true nearest depth,
/// so the oracle is indifferent to the scale of the cloud that was rendered.
class OracleProvider final : public DepthProvider {
 public:
  OracleProvider(Scene scene, CameraIntrinsics cam, OracleMode mode = {})
      : scene_(std::move(scene)), cam_(cam), mode_(mode) {
    if (scene_.primitives.empty()) throw DataError("oracle provider: empty scene");
    true_min_z_ = min_depth(oracle_depth(scene_, cam_));
  }

  const Scene& scene() const { return scene_; }
  const CameraIntrinsics& camera() const { return cam_; }
  double true_min_z() const { return true_min_z_; }
  const OracleMode& mode() const { return mode_; }

  void annotate(std::uint64_t render_id, const ViewRecord& view) override { registry_.put(render_id, view); }

  DepthMap predict_depth(const Image& image) override {
    if (image.width != cam_.width() || image.height != cam_.height())
      throw ProviderError("oracle provider: image size does not match the scene camera");
    const std::uint64_t key = image_key(image);
    const auto view = registry_.get(key);
    if (!view) throw ProviderError("oracle provider: unknown render id " + key_hex(key));
    return predict_at(*view, key);
  }

  DepthMap predict_at(const ViewRecord& view, std::uint64_t noise_seed = 0) const {
    const ViewTransform vt = novel_pose(view.theta, view.t_factor * true_min_z_, true_min_z_);
    DepthMap d = oracle_depth(scene_, cam_, vt);
    switch (mode_.kind) {
      case OracleMode::Kind::exact:
        return d;
      case OracleMode::Kind::distorted:
        return apply_affine(d, mode_.distortion);
      case OracleMode::Kind::noisy: {
        std::mt19937_64 rng(mix_seed(noise_seed));
        for (std::size_t i = 0; i < d.values.size(); ++i) {
          // Box-Muller from platform-independent uniforms.
          const double u1 = 1.0 - unit_from_bits(rng());
          const double u2 = unit_from_bits(rng());
          const double n = std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
          if (!d.mask[i]) continue;
          d.values[i] *= 1.0 + mode_.noise_sigma * n;
          if (!(d.values[i] > 0.0)) d.mask[i] = 0;
        }
        return d;
      }
    }
    return d;
  }

 private:
  Scene scene_;
  CameraIntrinsics cam_;
  OracleMode mode_;
  double true_min_z_ = 0.0;
  ViewRegistry registry_;
};

inline std::shared_ptr<OracleProvider> make_provider(const Scene& scene, const CameraIntrinsics& cam,
                                                     OracleMode mode = {}) {
  return std::make_shared<OracleProvider>(scene, cam, mode);
}

}  // namespace gpdepth
