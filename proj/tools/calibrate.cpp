// Prints the consistency-loss levels of the calibration scene and the FOV
// selection hit rate on random scenes. Used once to pick the frozen
// thresholds in the test suite; rerun after renderer or scene changes.

#include <chrono>
#include <cstdio>
#include <string>

#include "gpdepth/cycle.hpp"
#include "gpdepth/estimator.hpp"
#include "gpdepth/scenes.hpp"

using namespace gpdepth;

namespace {

void cycle_levels() {
  const Scene scene = calibration_scene();
  const CameraIntrinsics cam = scene.default_camera();
  const OracleView view = oracle_render(scene, cam);
  const double mz = min_depth(view.depth);
  const double med = median_of(view.depth);
  std::printf("calibration: min_z=%.4f median=%.4f valid=%.3f\n", mz, med,
              static_cast<double>(view.depth.count_valid()) / view.depth.pixel_count());

  CycleConfig cfg;
  for (double frac : {0.0, 0.1, 0.2, 0.5}) {
    auto provider = make_provider(scene, cam, OracleMode::distorted(1.0, frac * med));
    const DepthMap pred = predict_source_depth(*provider, view.image);
    const CycleReport r = cycle_consistency(view.image, pred, cam, *provider, deg_to_rad(15.0), 0.2 * mz, cfg);
    std::printf("  b=%.2f*median: loss_depth=%.5f loss_img=%.5f cov_novel=%.3f cov_img=%.3f a=%.4f b=%.4f\n", frac,
                r.loss_depth, r.loss_img, r.coverage_novel, r.coverage_img, r.align.a, r.align.b);
  }
  auto exact = make_provider(scene, cam);
  const CycleReport id = cycle_consistency(view.image, view.depth, cam, *exact, 0.0, 0.0, cfg);
  std::printf("  identity view: loss_depth=%.6f loss_img=%.6f\n", id.loss_depth, id.loss_img);
}

void fov_rates(int n_scenes) {
  int mfl_hits = 0, est_hits = 0;
  const auto t0 = std::chrono::steady_clock::now();
  for (int seed = 0; seed < n_scenes; ++seed) {
    const Scene scene = random_scene(static_cast<std::uint64_t>(seed));
    const CameraIntrinsics cam = scene.default_camera();
    const OracleView view = oracle_render(scene, cam);
    auto provider = make_provider(scene, cam);

    CycleConfig cfg;
    cfg.rng_seed = static_cast<std::uint64_t>(seed);
    const MflResult mfl = mfl_select(view.image, view.depth, *provider, cfg);
    const FovEstimate est = estimate_fov(view.image, view.depth, *provider);
    mfl_hits += mfl.fov_star == 60.0;
    est_hits += est.fov_star == 60.0;
    std::printf("seed %2d: mfl=%g (theta=%.1f) [", seed, mfl.fov_star, rad_to_deg(mfl.report.theta));
    for (const auto& p : mfl.per_fov) std::printf(" %.4f", p.loss);
    std::printf(" ] est=%g [", est.fov_star);
    for (const auto& p : est.per_candidate) std::printf(" %.4f", p.loss);
    std::printf(" ]\n");
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::printf("mfl %d/%d, estimate_fov %d/%d, %.1fs\n", mfl_hits, n_scenes, est_hits, n_scenes, secs);
}

}  // namespace

int main(int argc, char** argv) {
  const std::string what = argc > 1 ? argv[1] : "cycle";
  if (what == "cycle") cycle_levels();
  if (what == "fov") fov_rates(argc > 2 ? std::stoi(argv[2]) : 20);
  return 0;
}
