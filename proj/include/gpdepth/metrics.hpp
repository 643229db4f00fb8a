#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

#include "gpdepth/core.hpp"
#include "gpdepth/depthnorm.hpp"
#include "gpdepth/geometry.hpp"

namespace gpdepth {

struct EvalReport {
  double absrel = 0.0;
  double delta1 = 0.0;  // percent
  std::optional<double> pc_rmse;
  double scale_used = 1.0;
  double shift_used = 0.0;
  std::size_t pixels_evaluated = 0;
};

namespace detail {

inline Mask eval_mask(const DepthMap& d, const DepthMap& d_star) {
  if (d.width != d_star.width || d.height != d_star.height) throw DataError("metrics: depth maps differ in size");
  const Mask m = mask_and(d.mask, d_star.mask);
  if (mask_count(m) == 0) throw DataError("metrics: no pixel is valid in both maps");
  return m;
}

}  // namespace detail

/// Mean |D - D*| / D* over pixels valid in both maps.
inline double absrel(const DepthMap& d, const DepthMap& d_star) {
  const Mask m = detail::eval_mask(d, d_star);
  double acc = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < m.size(); ++i) {
    if (!m[i]) continue;
    acc += std::abs(d.values[i] - d_star.values[i]) / d_star.values[i];
    ++n;
  }
  return acc / static_cast<double>(n);
}

/// Percentage of pixels with max(D/D*, D*/D) < 1.25.
inline double delta1(const DepthMap& d, const DepthMap& d_star) {
  const Mask m = detail::eval_mask(d, d_star);
  std::size_t good = 0, n = 0;
  for (std::size_t i = 0; i < m.size(); ++i) {
    if (!m[i]) continue;
    const double r = std::max(d.values[i] / d_star.values[i], d_star.values[i] / d.values[i]);
    good += r < 1.25 ? 1 : 0;
    ++n;
  }
  return 100.0 * static_cast<double>(good) / static_cast<double>(n);
}

inline DepthMap scaled(DepthMap d, double s) {
  for (std::size_t i = 0; i < d.values.size(); ++i)
    if (d.mask[i]) d.values[i] *= s;
  return d;
}

/// RMS distance between corresponding (same pixel) points of the clouds
/// unprojected from the median-scaled prediction and the ground truth.
inline double pc_rmse(const DepthMap& d, const DepthMap& d_star, const CameraIntrinsics& cam) {
  const Mask m = detail::eval_mask(d, d_star);
  if (d.width != cam.width() || d.height != cam.height()) throw DataError("pc_rmse: camera size mismatch");
  const double s = median_scale(d, d_star);
  double acc = 0.0;
  std::size_t n = 0;
  for (int v = 0; v < d.height; ++v)
    for (int u = 0; u < d.width; ++u) {
      const std::size_t i = d.index(u, v);
      if (!m[i]) continue;
      const double dp = s * d.values[i], dg = d_star.values[i];
      const double rx = (u - cam.u0()) / cam.f(), ry = (v - cam.v0()) / cam.f();
      const Eigen::Vector3d p(rx * dp, ry * dp, dp), g(rx * dg, ry * dg, dg);
      acc += (p - g).squaredNorm();
      ++n;
    }
  return std::sqrt(acc / static_cast<double>(n));
}

/// Median-scale alignment followed by AbsRel and delta1 (and point-cloud RMSE
/// when intrinsics are given).
inline EvalReport eval_scale_aligned(const DepthMap& d, const DepthMap& d_star,
                                     const std::optional<CameraIntrinsics>& cam = std::nullopt) {
  const Mask m = detail::eval_mask(d, d_star);
  EvalReport rep;
  rep.scale_used = median_scale(d, d_star);
  const DepthMap aligned = scaled(d, rep.scale_used);
  rep.absrel = absrel(aligned, d_star);
  rep.delta1 = delta1(aligned, d_star);
  rep.pixels_evaluated = mask_count(m);
  if (cam) rep.pc_rmse = pc_rmse(d, d_star, *cam);
  return rep;
}

/// Least-squares scale and shift alignment followed by the same metrics.
inline EvalReport eval_scale_shift_aligned(const DepthMap& d, const DepthMap& d_star,
                                           const std::optional<CameraIntrinsics>& cam = std::nullopt) {
  detail::eval_mask(d, d_star);
  const AffineCoeffs c = lstsq_align(d, d_star);
  const DepthMap aligned = apply_affine(d, c);
  EvalReport rep;
  rep.scale_used = c.a;
  rep.shift_used = c.b;
  rep.absrel = absrel(aligned, d_star);
  rep.delta1 = delta1(aligned, d_star);
  rep.pixels_evaluated = mask_count(mask_and(aligned.mask, d_star.mask));
  if (cam) rep.pc_rmse = pc_rmse(aligned, d_star, *cam);
  return rep;
}

}  // namespace gpdepth
