#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "gpdepth/core.hpp"
#include "gpdepth/geometry.hpp"

namespace gpdepth {

struct SplatConfig {
  int footprint = 3;             // square splat width in pixels: 1, 3 or 5
  double depth_merge_eps = 0.01; // relative depth band blended with the winner
  // A footprint (non-center) splat overrides a pixel's center hit only when it
  // is nearer than center_z / (1 + occlusion_ratio).
  double occlusion_ratio = 0.1;

  void validate() const {
    if (footprint != 1 && footprint != 3 && footprint != 5)
      throw DomainError("splat footprint must be 1, 3 or 5");
    if (!(depth_merge_eps > 0.0 && depth_merge_eps < 1.0))
      throw DomainError("depth_merge_eps must lie in (0, 1)");
    if (!(occlusion_ratio >= 0.0)) throw DomainError("occlusion_ratio must be non-negative");
  }
};

struct RenderOutput {
  Image image;
  DepthMap depth;  // mask == coverage
  Mask coverage;

  double coverage_fraction() const {
    return coverage.empty() ? 0.0
                            : static_cast<double>(mask_count(coverage)) / static_cast<double>(coverage.size());
  }
};

inline constexpr double kNearClip = 1e-6;

/// Hard z-buffer point splatting. Each point is moved into the target frame,
/// culled at z <= kNearClip, and splatted over a footprint x footprint square
/// around its rounded projection. A pixel takes the nearest point projecting
/// into it unless another point's footprint is nearer by more than
/// occlusion_ratio; empty pixels take the nearest footprint. Colors of all
/// points within depth_merge_eps (relative) of the winner are averaged.
/// Runs sequentially in point order, so output is bit-reproducible.
inline RenderOutput render(const PointCloud& cloud, const ViewTransform& vt, const CameraIntrinsics& cam,
                           const SplatConfig& cfg = {}) {
  if (cloud.empty()) throw DataError("render: empty point cloud");
  cfg.validate();

  const int W = cam.width(), H = cam.height();
  const int r = cfg.footprint / 2;
  const std::size_t npix = static_cast<std::size_t>(W) * H;

  struct Splat {
    int cu, cv;
    double z;
  };
  std::vector<Splat> splats;
  splats.reserve(cloud.size());
  std::vector<std::size_t> source;
  source.reserve(cloud.size());

  const Eigen::Vector3d offset = vt.offset();
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const Eigen::Vector3d p = vt.R * cloud.positions[i] + offset;
    if (!(p.z() > kNearClip)) continue;
    const Projection pr = project_point(p, cam);
    if (!(pr.u > -r - 1.0 && pr.u < W + r && pr.v > -r - 1.0 && pr.v < H + r)) continue;
    splats.push_back({static_cast<int>(std::floor(pr.u + 0.5)), static_cast<int>(std::floor(pr.v + 0.5)), p.z()});
    source.push_back(i);
  }

  // Two-tier z-buffer: the pixel a point projects into (its center) and the
  // rest of its footprint are tracked separately.
  std::vector<double> zcenter(npix, std::numeric_limits<double>::infinity());
  std::vector<double> zfoot(npix, std::numeric_limits<double>::infinity());
  auto for_footprint = [&](const Splat& s, auto&& fn) {
    for (int v = std::max(0, s.cv - r); v <= std::min(H - 1, s.cv + r); ++v)
      for (int u = std::max(0, s.cu - r); u <= std::min(W - 1, s.cu + r); ++u)
        fn(static_cast<std::size_t>(v) * W + u);
  };

  for (const auto& s : splats) {
    if (s.cu >= 0 && s.cu < W && s.cv >= 0 && s.cv < H) {
      const std::size_t px = static_cast<std::size_t>(s.cv) * W + s.cu;
      zcenter[px] = std::min(zcenter[px], s.z);
    }
    for_footprint(s, [&](std::size_t px) { zfoot[px] = std::min(zfoot[px], s.z); });
  }

  std::vector<double> zbuf(npix);
  for (std::size_t px = 0; px < npix; ++px) {
    const bool occluded = zfoot[px] < zcenter[px] / (1.0 + cfg.occlusion_ratio);
    zbuf[px] = (std::isinf(zcenter[px]) || occluded) ? zfoot[px] : zcenter[px];
  }

  std::vector<double> acc(npix * 3, 0.0);
  std::vector<int> count(npix, 0);
  for (std::size_t k = 0; k < splats.size(); ++k) {
    const auto& s = splats[k];
    const auto& c = cloud.colors[source[k]];
    for_footprint(s, [&](std::size_t px) {
      if (std::abs(s.z - zbuf[px]) <= zbuf[px] * cfg.depth_merge_eps) {
        acc[px * 3 + 0] += c.x();
        acc[px * 3 + 1] += c.y();
        acc[px * 3 + 2] += c.z();
        ++count[px];
      }
    });
  }

  RenderOutput out;
  out.image = Image(W, H, 0.0);
  out.depth = DepthMap(W, H);
  out.coverage.assign(npix, 0);
  for (std::size_t px = 0; px < npix; ++px) {
    if (count[px] == 0) continue;
    out.coverage[px] = 1;
    out.depth.values[px] = zbuf[px];
    out.depth.mask[px] = 1;
    for (int ch = 0; ch < 3; ++ch) {
      // A single contributor is copied verbatim so identity renders are exact.
      const double v = count[px] == 1 ? acc[px * 3 + ch] : acc[px * 3 + ch] / count[px];
      out.image.rgb[px * 3 + ch] = std::clamp(v, 0.0, 1.0);
    }
  }
  return out;
}

/// Renders a novel-view cloud back into the source camera using the inverse of
/// the forward pivoted transform.
inline RenderOutput render_back(const PointCloud& cloud, const ViewTransform& vt_forward,
                                const CameraIntrinsics& cam, const SplatConfig& cfg = {}) {
  return render(cloud, inverse_pose(vt_forward), cam, cfg);
}

}  // namespace gpdepth
