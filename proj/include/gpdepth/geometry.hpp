#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <random>
#include <utility>
#include <vector>

#include "gpdepth/core.hpp"

namespace gpdepth {

/// Pinhole intrinsics in pixels. Pixel (u, v) samples the ray through its
/// integer coordinate; there is no half-pixel offset.
class CameraIntrinsics {
 public:
  CameraIntrinsics(double f, double u0, double v0, int width, int height)
      : f_(f), u0_(u0), v0_(v0), width_(width), height_(height) {
    if (!(f > 0.0) || !std::isfinite(f)) throw DomainError("focal length must be positive");
    if (width < 2 || height < 2) throw DomainError("image must be at least 2x2");
    if (!(u0 >= 0.0 && u0 < width) || !(v0 >= 0.0 && v0 < height))
      throw DomainError("principal point outside the image");
  }

  /// Centered principal point (W/2, H/2).
  static CameraIntrinsics centered(double f, int width, int height) {
    return CameraIntrinsics(f, width / 2.0, height / 2.0, width, height);
  }

  double f() const { return f_; }
  double u0() const { return u0_; }
  double v0() const { return v0_; }
  int width() const { return width_; }
  int height() const { return height_; }

  /// Horizontal field of view in degrees.
  double fov_degrees() const { return rad_to_deg(2.0 * std::atan(width_ / (2.0 * f_))); }

  bool operator==(const CameraIntrinsics&) const = default;

 private:
  double f_, u0_, v0_;
  int width_, height_;
};

/// f = W / (2 tan(FOV/2)), FOV horizontal and in degrees.
inline double focal_from_fov(double fov_degrees, int width) {
  if (!(fov_degrees > 0.0 && fov_degrees < 180.0))
    throw DomainError("field of view must lie in (0, 180) degrees");
  if (width < 2) throw DomainError("image width must be at least 2");
  return width / (2.0 * std::tan(deg_to_rad(fov_degrees) / 2.0));
}

inline CameraIntrinsics camera_from_fov(double fov_degrees, int width, int height) {
  return CameraIntrinsics::centered(focal_from_fov(fov_degrees, width), width, height);
}

struct PointCloud {
  std::vector<Eigen::Vector3d> positions;
  std::vector<Eigen::Vector3d> colors;
  std::vector<std::array<int, 2>> source_pixels;

  std::size_t size() const { return positions.size(); }
  bool empty() const { return positions.empty(); }
};

/// Rigid transform p' = R (p - pivot) + T + pivot.
struct ViewTransform {
  Eigen::Matrix3d R = Eigen::Matrix3d::Identity();
  Eigen::Vector3d T = Eigen::Vector3d::Zero();
  Eigen::Vector3d pivot = Eigen::Vector3d::Zero();

  // Evaluated as R p + (T + pivot - R pivot) so the identity transform is
  // bit-exact.
  Eigen::Vector3d offset() const { return T + pivot - R * pivot; }
  Eigen::Vector3d apply(const Eigen::Vector3d& p) const { return R * p + offset(); }

  bool is_rotation(double tol = 1e-9) const {
    return (R.transpose() * R - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() < tol &&
           std::abs(R.determinant() - 1.0) < tol;
  }
};

/// Rotation about the camera y axis (horizontal pan).
inline Eigen::Matrix3d rotation_y(double theta) {
  const double c = std::cos(theta), s = std::sin(theta);
  Eigen::Matrix3d R;
  R << c, 0.0, s, 0.0, 1.0, 0.0, -s, 0.0, c;
  return R;
}

inline Eigen::Matrix3d rotation_x(double angle) {
  const double c = std::cos(angle), s = std::sin(angle);
  Eigen::Matrix3d R;
  R << 1.0, 0.0, 0.0, 0.0, c, -s, 0.0, s, c;
  return R;
}

/// Novel view: pan by theta (radians) about the pivot [0,0,min_z] and shift by
/// t along z.
inline ViewTransform novel_pose(double theta, double t, double min_z) {
  if (!(min_z > 0.0)) throw DomainError("novel_pose: min_z must be positive");
  ViewTransform vt;
  vt.R = rotation_y(theta);
  vt.T = Eigen::Vector3d(0.0, 0.0, t);
  vt.pivot = Eigen::Vector3d(0.0, 0.0, min_z);
  return vt;
}

/// Exact inverse of a pivoted transform, expressed with zero pivot:
/// R_inv = R^T, T_inv = -R^T (T + pivot) + pivot.
inline ViewTransform inverse_pose(const ViewTransform& vt) {
  if (!vt.is_rotation()) throw DomainError("inverse_pose: R is not a rotation");
  ViewTransform inv;
  inv.R = vt.R.transpose();
  inv.T = -vt.R.transpose() * (vt.T + vt.pivot) + vt.pivot;
  inv.pivot = Eigen::Vector3d::Zero();
  return inv;
}

/// Back-projects every valid pixel; row-major order over valid pixels.
inline PointCloud unproject(const DepthMap& depth, const CameraIntrinsics& cam, const Image& image) {
  if (depth.width != cam.width() || depth.height != cam.height())
    throw DataError("unproject: depth size does not match the camera");
  if (image.width != cam.width() || image.height != cam.height())
    throw DataError("unproject: image size does not match the camera");
  depth.validate();

  PointCloud cloud;
  const std::size_t n = depth.count_valid();
  cloud.positions.reserve(n);
  cloud.colors.reserve(n);
  cloud.source_pixels.reserve(n);
  const double inv_f = 1.0 / cam.f();
  for (int v = 0; v < depth.height; ++v) {
    for (int u = 0; u < depth.width; ++u) {
      if (!depth.valid(u, v)) continue;
      const double d = depth(u, v);
      cloud.positions.emplace_back((u - cam.u0()) * inv_f * d, (v - cam.v0()) * inv_f * d, d);
      cloud.colors.emplace_back(image.at(u, v, 0), image.at(u, v, 1), image.at(u, v, 2));
      cloud.source_pixels.push_back({u, v});
    }
  }
  return cloud;
}

struct Projection {
  double u = 0.0;
  double v = 0.0;
  double z = 0.0;
  bool in_front = false;
};

inline Projection project_point(const Eigen::Vector3d& p, const CameraIntrinsics& cam) {
  Projection pr;
  pr.z = p.z();
  pr.in_front = p.z() > 0.0;
  if (pr.in_front) {
    pr.u = cam.f() * p.x() / p.z() + cam.u0();
    pr.v = cam.f() * p.y() / p.z() + cam.v0();
  }
  return pr;
}

inline std::vector<Projection> project(const PointCloud& cloud, const CameraIntrinsics& cam) {
  std::vector<Projection> out;
  out.reserve(cloud.size());
  for (const auto& p : cloud.positions) out.push_back(project_point(p, cam));
  return out;
}

inline double min_depth(const PointCloud& cloud) {
  if (cloud.empty()) throw DataError("min_depth: empty point cloud");
  double m = cloud.positions.front().z();
  for (const auto& p : cloud.positions) m = std::min(m, p.z());
  return m;
}

/// Smallest valid depth; equals min_depth(unproject(d, ...)).
inline double min_depth(const DepthMap& d) {
  double m = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < d.values.size(); ++i)
    if (d.mask[i]) m = std::min(m, d.values[i]);
  if (!std::isfinite(m)) throw DataError("min_depth: no valid pixels");
  return m;
}

struct ViewParams {
  double theta = 0.0;  // radians
  double t = 0.0;      // scene units
};

struct ViewSampling {
  double theta_min_deg = -30.0;
  double theta_max_deg = 30.0;
  double t_min_factor = -1.0;  // times min_z
  double t_max_factor = 2.0;
};

/// Deterministic draw of (theta, t); t scales linearly with min_z for a fixed seed.
inline ViewParams sample_view_params(std::uint64_t seed, double min_z, const ViewSampling& range = {}) {
  if (!(min_z > 0.0)) throw DomainError("sample_view_params: min_z must be positive");
  std::mt19937_64 rng(seed);
  const double a = unit_from_bits(rng());
  const double b = unit_from_bits(rng());
  ViewParams p;
  p.theta = deg_to_rad(range.theta_min_deg + (range.theta_max_deg - range.theta_min_deg) * a);
  p.t = min_z * (range.t_min_factor + (range.t_max_factor - range.t_min_factor) * b);
  return p;
}

}  // namespace gpdepth
