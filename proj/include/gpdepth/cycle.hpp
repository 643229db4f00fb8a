#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include "gpdepth/core.hpp"
#include "gpdepth/depthnorm.hpp"
#include "gpdepth/geometry.hpp"
#include "gpdepth/provider.hpp"
#include "gpdepth/renderer.hpp"

namespace gpdepth {

struct CycleConfig {
  double alpha = 1.0;  // weight of the image term
  double beta = 0.1;   // weight of the consistency term in the total loss
  std::vector<double> fov_candidates{50.0, 60.0, 70.0};  // degrees
  double min_coverage = 0.10;
  int views_per_image = 1;
  std::uint64_t rng_seed = 0;
  SplatConfig splat;
  int max_resamples = 8;
  ViewSampling sampling;

  void validate() const {
    if (!(alpha >= 0.0) || !(beta >= 0.0)) throw DomainError("alpha and beta must be non-negative");
    if (fov_candidates.empty()) throw DomainError("fov_candidates must not be empty");
    if (!(min_coverage > 0.0 && min_coverage <= 1.0)) throw DomainError("min_coverage must lie in (0, 1]");
    if (views_per_image < 1) throw DomainError("views_per_image must be at least 1");
    if (max_resamples < 1) throw DomainError("max_resamples must be at least 1");
    splat.validate();
  }
};

struct FovLoss {
  double fov = 0.0;  // degrees
  double loss = 0.0;
};

struct CycleReport {
  double loss_img = 0.0;
  double loss_depth = 0.0;
  double loss_total = 0.0;
  AffineCoeffs align;
  bool alignment_ok = true;  // false when a <= 0 or the fit was singular
  double coverage_img = 0.0;
  double coverage_depth = 0.0;
  double coverage_novel = 0.0;
  std::vector<FovLoss> per_fov;
  double fov = 0.0;          // degrees, of the camera used
  double chosen_fov = 0.0;   // degrees
  double theta = 0.0;        // radians
  double t = 0.0;
  double min_z = 0.0;
};

struct NovelView {
  Image image;
  DepthMap depth;
  Mask mask;
  double coverage = 0.0;
  ViewTransform vt;
  double min_z = 0.0;
};

/// Unproject, move the camera by (theta, t) about [0,0,min_z], render.
inline NovelView render_novel(const Image& image, const DepthMap& depth, const CameraIntrinsics& cam, double theta,
                              double t, const SplatConfig& splat = {}, double min_coverage = 0.10) {
  const PointCloud cloud = unproject(depth, cam, image);
  if (cloud.empty()) throw DataError("render_novel: depth map has no valid pixels");
  NovelView nv;
  nv.min_z = min_depth(cloud);
  nv.vt = novel_pose(theta, t, nv.min_z);
  RenderOutput r = render(cloud, nv.vt, cam, splat);
  nv.coverage = r.coverage_fraction();
  if (nv.coverage < min_coverage)
    throw DegenerateViewError("novel view covers " + std::to_string(nv.coverage) + " of the frame");
  nv.image = std::move(r.image);
  nv.depth = std::move(r.depth);
  nv.mask = std::move(r.coverage);
  return nv;
}

/// Asks the provider for depth of an unmodified input image (identity view).
inline DepthMap predict_source_depth(DepthProvider& provider, const Image& image) {
  provider.annotate(image_key(image), ViewRecord{0.0, 0.0});
  return provider.predict_depth(image);
}

/// Mean absolute difference over all channels of pixels in `m`.
inline double masked_l1(const Image& a, const Image& b, const Mask& m) {
  if (a.width != b.width || a.height != b.height) throw DataError("image sizes differ");
  double acc = 0.0;
  std::size_t n = 0;
  for (std::size_t px = 0; px < m.size(); ++px) {
    if (!m[px]) continue;
    for (int c = 0; c < 3; ++c) acc += std::abs(a.rgb[px * 3 + c] - b.rgb[px * 3 + c]);
    n += 3;
  }
  return n == 0 ? 1.0 : acc / static_cast<double>(n);
}

inline constexpr double kMaxImageLoss = 1.0;

/// One pass of the render / re-estimate / align / render-back cycle.
inline CycleReport cycle_consistency(const Image& image, const DepthMap& depth_pred, const CameraIntrinsics& cam,
                                     DepthProvider& provider, double theta, double t, const CycleConfig& cfg = {}) {
  if (image.width != cam.width() || image.height != cam.height() || depth_pred.width != cam.width() ||
      depth_pred.height != cam.height())
    throw DataError("cycle: image, depth and camera sizes disagree");

  CycleReport rep;
  rep.theta = theta;
  rep.t = t;
  rep.fov = cam.fov_degrees();
  rep.chosen_fov = rep.fov;

  // (1) novel view of the predicted geometry
  NovelView nv = render_novel(image, depth_pred, cam, theta, t, cfg.splat, cfg.min_coverage);
  rep.min_z = nv.min_z;
  rep.coverage_novel = nv.coverage;

  // (2) depth of the rendered image from the same source
  const std::uint64_t id = image_key(nv.image);
  provider.annotate(id, ViewRecord{theta, t / nv.min_z});
  DepthMap novel_pred = provider.predict_depth(nv.image);
  detail::check_provider_output(novel_pred, nv.image);

  const Mask m_depth = mask_and(nv.mask, novel_pred.mask);
  const std::size_t n_depth = mask_count(m_depth);
  if (n_depth < 2) throw DegenerateViewError("cycle: provider and render share fewer than two pixels");
  const double npix = static_cast<double>(m_depth.size());
  rep.coverage_depth = static_cast<double>(n_depth) / npix;
  novel_pred = restrict_mask(std::move(novel_pred), m_depth);

  rep.loss_depth = ssi_loss(novel_pred, nv.depth);

  // (3) align the new prediction to the rendered depth
  try {
    rep.align = lstsq_align(novel_pred, nv.depth);
    rep.alignment_ok = rep.align.a > 0.0;
  } catch (const DomainError&) {
    rep.alignment_ok = false;
  }

  rep.loss_img = kMaxImageLoss;
  if (rep.alignment_ok) {
    // (4) reconstruct from the aligned prediction, (5) render back
    const DepthMap aligned = apply_affine(novel_pred, rep.align);
    const PointCloud back_cloud = unproject(aligned, cam, nv.image);
    if (!back_cloud.empty()) {
      const RenderOutput back = render_back(back_cloud, nv.vt, cam, cfg.splat);
      const Mask m_img = mask_and(back.coverage, depth_pred.mask);
      rep.coverage_img = static_cast<double>(mask_count(m_img)) / npix;
      // (6) photometric term over jointly covered pixels
      rep.loss_img = masked_l1(back.image, image, m_img);
    }
  }
  rep.loss_total = rep.loss_depth + cfg.alpha * rep.loss_img;
  return rep;
}

/// L = L_ssi + beta * L_c(f*).
inline double total_loss(double l_ssi, double l_c_fstar, double beta) {
  if (!(l_ssi >= 0.0) || !(l_c_fstar >= 0.0)) throw DomainError("total_loss: losses must be non-negative");
  return l_ssi + beta * l_c_fstar;
}

/// Seed of the attempt-th draw for the view-th sampled view.
inline std::uint64_t view_seed(std::uint64_t seed, int view, int attempt) {
  return mix_seed(mix_seed(seed, static_cast<std::uint64_t>(view)), static_cast<std::uint64_t>(attempt));
}

/// Cycle at a sampled view; degenerate draws are resampled up to
/// cfg.max_resamples times.
inline CycleReport sampled_cycle(const Image& image, const DepthMap& depth_pred, const CameraIntrinsics& cam,
                                 DepthProvider& provider, const CycleConfig& cfg, int view = 0) {
  cfg.validate();
  const double mz = min_depth(depth_pred);
  for (int attempt = 0; attempt < cfg.max_resamples; ++attempt) {
    const ViewParams p = sample_view_params(view_seed(cfg.rng_seed, view, attempt), mz, cfg.sampling);
    try {
      return cycle_consistency(image, depth_pred, cam, provider, p.theta, p.t, cfg);
    } catch (const DegenerateViewError&) {
    }
  }
  throw DegenerateViewError("no usable view after " + std::to_string(cfg.max_resamples) + " draws");
}

struct MflResult {
  double fov_star = 0.0;    // degrees
  double focal_star = 0.0;  // pixels
  double loss_at_fstar = 0.0;
  std::vector<FovLoss> per_fov;
  CycleReport report;  // chosen candidate, first view
};

/// Multi-focal-length selection: the same sampled views are evaluated under
/// every candidate FOV; L^C is averaged over views and the minimum kept.
/// Ties go to the smaller FOV.
inline MflResult mfl_select(const Image& image, const DepthMap& depth_pred, DepthProvider& provider,
                            const CycleConfig& cfg) {
  cfg.validate();
  const double mz = min_depth(depth_pred);
  const std::size_t nc = cfg.fov_candidates.size();
  std::vector<CameraIntrinsics> cams;
  for (double fov : cfg.fov_candidates) cams.push_back(camera_from_fov(fov, image.width, image.height));

  std::vector<double> sum(nc, 0.0);
  std::vector<int> used(nc, 0);
  std::vector<std::optional<CycleReport>> first(nc);

  for (int view = 0; view < cfg.views_per_image; ++view) {
    for (int attempt = 0; attempt < cfg.max_resamples; ++attempt) {
      const ViewParams p = sample_view_params(view_seed(cfg.rng_seed, view, attempt), mz, cfg.sampling);
      std::vector<std::optional<CycleReport>> reps(nc);
      bool any = false;
      for (std::size_t k = 0; k < nc; ++k) {
        try {
          reps[k] = cycle_consistency(image, depth_pred, cams[k], provider, p.theta, p.t, cfg);
          any = true;
        } catch (const DegenerateViewError&) {
        }
      }
      if (!any) continue;
      for (std::size_t k = 0; k < nc; ++k) {
        if (!reps[k]) continue;
        sum[k] += reps[k]->loss_total;
        ++used[k];
        if (!first[k]) first[k] = reps[k];
      }
      break;
    }
  }

  MflResult res;
  std::size_t best = nc;
  for (std::size_t k = 0; k < nc; ++k) {
    const double loss = used[k] ? sum[k] / used[k] : std::numeric_limits<double>::infinity();
    res.per_fov.push_back({cfg.fov_candidates[k], loss});
    if (!used[k]) continue;
    const bool better = best == nc || loss < res.per_fov[best].loss ||
                        (loss == res.per_fov[best].loss && cfg.fov_candidates[k] < cfg.fov_candidates[best]);
    if (better) best = k;
  }
  if (best == nc) throw DegenerateViewError("mfl_select: every candidate was degenerate");

  res.fov_star = cfg.fov_candidates[best];
  res.focal_star = cams[best].f();
  res.loss_at_fstar = res.per_fov[best].loss;
  res.report = *first[best];
  res.report.per_fov = res.per_fov;
  res.report.chosen_fov = res.fov_star;
  return res;
}

}  // namespace gpdepth
