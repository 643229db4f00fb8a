#pragma once

#include <cmath>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "gpdepth/core.hpp"
#include "gpdepth/cycle.hpp"
#include "gpdepth/depthnorm.hpp"
#include "gpdepth/nelder_mead.hpp"

namespace gpdepth {

enum class ConsistencyObjective { depth, image };

inline double pick_loss(const CycleReport& r, ConsistencyObjective o) {
  return o == ConsistencyObjective::depth ? r.loss_depth : r.loss_img;
}

// ---------------------------------------------------------------------------
// Domain-level affine recovery.

struct RecoveryConfig {
  ConsistencyObjective objective = ConsistencyObjective::depth;
  std::vector<double> grid_a{0.5, 0.75, 1.0, 1.5, 2.0};
  // Shifts in units of each image's own sigma (mean absolute deviation).
  std::vector<double> grid_b{-1.0, -0.5, -0.25, 0.0, 0.25, 0.5, 1.0};
  int refine_iters = 60;
  int views_per_image = 2;
  std::uint64_t rng_seed = 0;
  SplatConfig splat;
  double min_coverage = 0.10;
  int max_resamples = 8;
  ViewSampling sampling;
  // Used for samples whose intrinsics are unknown: the minimum over these FOVs.
  std::vector<double> fov_candidates{50.0, 60.0, 70.0};

  void validate() const {
    if (grid_a.empty() || grid_b.empty()) throw DomainError("recovery grids must not be empty");
    if (refine_iters < 0) throw DomainError("refine_iters must be non-negative");
    if (views_per_image < 1) throw DomainError("views_per_image must be at least 1");
    if (fov_candidates.empty()) throw DomainError("fov_candidates must not be empty");
    splat.validate();
  }
};

/// One (a, b_rel) pair for a whole domain; the absolute shift of an image is
/// b_rel times that image's sigma.
struct DomainAffine {
  double a = 1.0;
  double b_rel = 0.0;

  AffineCoeffs for_depth(const DepthMap& raw) const { return {a, b_rel * ssi_stats(raw).sigma}; }
};

struct RecoverySample {
  Image image;
  DepthMap raw_depth;
  std::optional<CameraIntrinsics> cam;
  std::shared_ptr<DepthProvider> provider;  // falls back to the shared provider when null
};

struct RecoveryResult {
  DomainAffine affine;
  double objective = 0.0;
  DomainAffine grid_best;
  double grid_objective = 0.0;
  std::vector<double> trace;  // grid minimum followed by the refinement's best-so-far values
  int evaluations = 0;
};

/// Objective value for cells that cannot be evaluated. Larger than any SSI
/// (<= 2) or image (<= 1) loss.
inline constexpr double kPenalty = 4.0;

/// Mean consistency loss over the dataset after correcting every raw depth
/// with `affine`. Never throws for bad parameters; those are penalized.
class RecoveryObjective {
 public:
  RecoveryObjective(std::span<const RecoverySample> data, std::shared_ptr<DepthProvider> shared,
                    const RecoveryConfig& cfg)
      : data_(data), shared_(std::move(shared)), cfg_(cfg) {
    if (data_.empty()) throw DataError("recover_affine: empty dataset");
    for (const auto& s : data_) {
      if (!s.provider && !shared_) throw DomainError("recover_affine: sample without a depth provider");
      sigma_.push_back(ssi_stats(s.raw_depth).sigma);
      valid_.push_back(s.raw_depth.count_valid());
    }
  }

  double operator()(double a, double b_rel) const {
    double acc = 0.0;
    for (std::size_t i = 0; i < data_.size(); ++i) acc += sample_loss(i, a, b_rel);
    return acc / static_cast<double>(data_.size());
  }

 private:
  double sample_loss(std::size_t i, double a, double b_rel) const {
    if (!(a > 0.0) || !std::isfinite(a) || !std::isfinite(b_rel)) return kPenalty;
    const RecoverySample& s = data_[i];
    const DepthMap depth = apply_affine(s.raw_depth, {a, b_rel * sigma_[i]});
    if (depth.count_valid() * 2 < valid_[i]) return kPenalty;
    DepthProvider& provider = s.provider ? *s.provider : *shared_;
    const double mz = min_depth(depth);

    CycleConfig cc;
    cc.splat = cfg_.splat;
    cc.min_coverage = cfg_.min_coverage;
    const std::uint64_t seed = mix_seed(cfg_.rng_seed, i);

    double acc = 0.0;
    for (int view = 0; view < cfg_.views_per_image; ++view) {
      double loss = kPenalty;
      for (int attempt = 0; attempt < cfg_.max_resamples; ++attempt) {
        const ViewParams p = sample_view_params(view_seed(seed, view, attempt), mz, cfg_.sampling);
        const auto l = view_loss(s, depth, provider, p, cc);
        if (l) {
          loss = *l;
          break;
        }
      }
      acc += loss;
    }
    return acc / cfg_.views_per_image;
  }

  std::optional<double> view_loss(const RecoverySample& s, const DepthMap& depth, DepthProvider& provider,
                                  const ViewParams& p, const CycleConfig& cc) const {
    auto one = [&](const CameraIntrinsics& cam) -> std::optional<double> {
      try {
        return pick_loss(cycle_consistency(s.image, depth, cam, provider, p.theta, p.t, cc), cfg_.objective);
      } catch (const DegenerateViewError&) {
        return std::nullopt;
      }
    };
    if (s.cam) return one(*s.cam);
    std::optional<double> best;
    for (double fov : cfg_.fov_candidates) {
      const auto l = one(camera_from_fov(fov, s.image.width, s.image.height));
      if (l && (!best || *l < *best)) best = l;
    }
    return best;
  }

  std::span<const RecoverySample> data_;
  std::shared_ptr<DepthProvider> shared_;
  RecoveryConfig cfg_;
  std::vector<double> sigma_;
  std::vector<std::size_t> valid_;
};

/// Exhaustive grid over (a, b_rel) followed by Nelder-Mead refinement from the
/// best cell.
inline RecoveryResult recover_affine(std::span<const RecoverySample> data, std::shared_ptr<DepthProvider> provider,
                                     const RecoveryConfig& cfg = {}) {
  cfg.validate();
  const RecoveryObjective objective(data, std::move(provider), cfg);

  RecoveryResult res;
  res.grid_objective = std::numeric_limits<double>::infinity();
  for (double a : cfg.grid_a)
    for (double b : cfg.grid_b) {
      const double v = objective(a, b);
      ++res.evaluations;
      if (v < res.grid_objective) {
        res.grid_objective = v;
        res.grid_best = {a, b};
      }
    }
  if (!(res.grid_objective < kPenalty)) throw DegenerateViewError("recover_affine: every grid cell is degenerate");

  res.affine = res.grid_best;
  res.objective = res.grid_objective;
  res.trace.push_back(res.grid_objective);
  if (cfg.refine_iters > 0) {
    NelderMeadOptions opt;
    opt.max_iters = cfg.refine_iters;
    const Eigen::Vector2d x0(res.grid_best.a, res.grid_best.b_rel);
    const Eigen::Vector2d step(0.25 * res.grid_best.a, 0.25);
    const auto nm = nelder_mead([&](const Eigen::VectorXd& x) { return objective(x[0], x[1]); }, x0, step, opt);
    res.evaluations += nm.evaluations;
    // The simplex contains the grid cell, so its best is never worse.
    for (double v : nm.trace) res.trace.push_back(std::min(v, res.trace.back()));
    if (nm.value < res.objective) {
      res.objective = nm.value;
      res.affine = {nm.x[0], nm.x[1]};
    }
  }
  return res;
}

// ---------------------------------------------------------------------------
// Test-time focal length selection from a fixed set of rendered views.

struct FovEstimateConfig {
  std::vector<double> candidates{40.0, 50.0, 60.0, 70.0, 80.0};  // degrees
  std::vector<double> shift_factors{-0.5, 0.5};                  // times min_z
  std::vector<double> angles{-20.0, 20.0};                       // degrees
  ConsistencyObjective objective = ConsistencyObjective::depth;
  double min_coverage = 0.10;

  void validate() const {
    if (candidates.empty() || shift_factors.empty() || angles.empty())
      throw DomainError("fov estimate lists must not be empty");
  }
};

struct FovEstimate {
  double fov_star = 0.0;  // degrees
  std::vector<FovLoss> per_candidate;
};

/// Mean consistency loss over every (shift, angle) view for each candidate
/// FOV; the minimum wins, ties toward the smaller FOV.
inline FovEstimate estimate_fov(const Image& image, const DepthMap& depth_pred, DepthProvider& provider,
                                const FovEstimateConfig& cfg = {}, const SplatConfig& splat = {}) {
  cfg.validate();
  const double mz = min_depth(depth_pred);
  CycleConfig cc;
  cc.splat = splat;
  cc.min_coverage = cfg.min_coverage;

  FovEstimate est;
  std::optional<std::size_t> best;
  for (std::size_t k = 0; k < cfg.candidates.size(); ++k) {
    const CameraIntrinsics cam = camera_from_fov(cfg.candidates[k], image.width, image.height);
    double acc = 0.0;
    int n = 0;
    for (double shift : cfg.shift_factors)
      for (double angle : cfg.angles) {
        try {
          acc += pick_loss(cycle_consistency(image, depth_pred, cam, provider, deg_to_rad(angle), shift * mz, cc),
                           cfg.objective);
          ++n;
        } catch (const DegenerateViewError&) {
        }
      }
    const double loss = n ? acc / n : std::numeric_limits<double>::infinity();
    est.per_candidate.push_back({cfg.candidates[k], loss});
    if (!n) continue;
    const auto& cur = est.per_candidate[k];
    if (!best || cur.loss < est.per_candidate[*best].loss ||
        (cur.loss == est.per_candidate[*best].loss && cur.fov < est.per_candidate[*best].fov))
      best = k;
  }
  if (!best) throw DegenerateViewError("estimate_fov: every view of every candidate was degenerate");
  est.fov_star = est.per_candidate[*best].fov;
  return est;
}

}  // namespace gpdepth
