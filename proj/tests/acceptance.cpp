// Acceptance run: one PASS/FAIL line per criterion.
//
//   acceptance [--only N[,N...]] [--known-failure N[,N...]]
//
// Exit status is 0 when every failing criterion is listed as a known failure.
// Known failures still print FAIL with their measured numbers.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "gpdepth/cycle.hpp"
#include "gpdepth/estimator.hpp"
#include "gpdepth/io.hpp"
#include "gpdepth/metrics.hpp"
#include "gpdepth/scenes.hpp"

#ifndef GPDEPTH_CLI_PATH
#error "GPDEPTH_CLI_PATH must name the gpdepth executable"
#endif

using namespace gpdepth;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

DepthMap random_map(std::mt19937_64& rng, int w, int h, double lo, double hi, double drop = 0.0) {
  std::uniform_real_distribution<double> uni(lo, hi), coin(0.0, 1.0);
  DepthMap d(w, h);
  for (std::size_t i = 0; i < d.values.size(); ++i) {
    d.values[i] = uni(rng);
    d.mask[i] = coin(rng) >= drop;
  }
  return d;
}

// 1. project(unproject(.)) is the identity on 10^6 pixels.
Outcome geometry_round_trip() {
  std::mt19937_64 rng(1);
  const CameraIntrinsics cam = camera_from_fov(73.0, 1000, 1000);
  const DepthMap d = random_map(rng, 1000, 1000, 0.1, 100.0);
  const PointCloud c = unproject(d, cam, Image(1000, 1000));
  double worst = 0.0;
  std::size_t k = 0;
  for (int v = 0; v < 1000; ++v)
    for (int u = 0; u < 1000; ++u, ++k) {
      const Projection p = project_point(c.positions[k], cam);
      worst = std::max({worst, std::abs(p.u - u) / std::max(1.0, double(u)), std::abs(p.v - v) / std::max(1.0, double(v)),
                        std::abs(p.z - d.values[k]) / d.values[k]});
    }
  return {worst < 1e-6, fmt("max relative error %.3g over %zu pixels", worst, k)};
}

// 2. Forward and inverse pose compose to the identity.
Outcome pose_algebra() {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> th(-std::numbers::pi, std::numbers::pi), tt(-5.0, 5.0), mz(0.05, 20.0),
      xyz(-20.0, 20.0);
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const ViewTransform f = novel_pose(th(rng), tt(rng), mz(rng));
    const ViewTransform inv = inverse_pose(f);
    for (int j = 0; j < 100; ++j) {
      const Eigen::Vector3d p(xyz(rng), xyz(rng), xyz(rng));
      worst = std::max({worst, (inv.apply(f.apply(p)) - p).norm(), (f.apply(inv.apply(p)) - p).norm()});
    }
  }
  return {worst < 1e-9, fmt("max point error %.3g over 100 poses", worst)};
}

// 3. SSI loss ignores positive affine maps of the prediction.
Outcome ssi_invariance() {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> ua(0.01, 100.0), ub(-0.45, 50.0);
  std::uniform_int_distribution<int> size(2, 48);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const int w = size(rng), h = size(rng);
    const DepthMap d = random_map(rng, w, h, 0.5, 10.0, 0.2), ds = random_map(rng, w, h, 0.5, 10.0, 0.2);
    if (mask_count(mask_and(d.mask, ds.mask)) == 0) continue;
    const double a = ua(rng), b = ub(rng) * a;  // keeps a*D + b positive for D >= 0.5
    worst = std::max(worst, std::abs(ssi_loss(apply_affine(d, {a, b}), ds) - ssi_loss(d, ds)));
  }
  return {worst < 1e-9, fmt("max |difference| %.3g over 1000 cases", worst)};
}

// 4. Least squares recovers a constructed affine exactly.
Outcome lstsq_exactness() {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> ua(0.05, 20.0), ub(-5.0, 5.0);
  double worst = 0.0;
  for (int i = 0; i < 200; ++i) {
    const DepthMap d = random_map(rng, 64, 48, 0.5, 10.0, 0.1);
    const double a0 = ua(rng), b0 = ub(rng);
    DepthMap ref = d;
    for (auto& v : ref.values) v = a0 * v + b0;  // may leave (0, inf); fit on raw values
    const AffineCoeffs c = lstsq_align(d, ref);
    worst = std::max({worst, std::abs(c.a - a0) / std::abs(a0), std::abs(c.b - b0) / std::max(1.0, std::abs(b0))});
  }
  return {worst < 1e-9, fmt("max relative coefficient error %.3g over 200 fits", worst)};
}

// 5. Footprint 1 at the identity pose reproduces its input.
Outcome identity_render() {
  std::mt19937_64 rng(5);
  const CameraIntrinsics cam = camera_from_fov(60.0, 128, 128);
  const DepthMap d = random_map(rng, 128, 128, 0.5, 10.0, 0.1);
  Image img(128, 128);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  for (auto& x : img.rgb) x = uni(rng);
  SplatConfig s;
  s.footprint = 1;
  const RenderOutput r = render(unproject(d, cam, img), ViewTransform{}, cam, s);
  std::size_t bad = 0;
  for (std::size_t i = 0; i < d.values.size(); ++i) {
    if (bool(r.coverage[i]) != bool(d.mask[i])) ++bad;
    if (!d.mask[i]) continue;
    if (r.depth.values[i] != d.values[i]) ++bad;
    for (int c = 0; c < 3; ++c) bad += r.image.rgb[i * 3 + c] != img.rgb[i * 3 + c];
  }
  return {bad == 0, fmt("%zu mismatching values over %zu valid pixels", bad, mask_count(d.mask))};
}

// 6. Cycle losses on the calibration scene.
Outcome cycle_calibration() {
  const Scene scene = calibration_scene();
  const CameraIntrinsics cam = scene.default_camera();
  const OracleView view = oracle_render(scene, cam);
  const double mz = min_depth(view.depth), med = median_of(view.depth);
  auto run = [&](double b) {
    auto p = make_provider(scene, cam, OracleMode::distorted(1.0, b));
    const DepthMap pred = predict_source_depth(*p, view.image);
    return cycle_consistency(view.image, pred, cam, *p, deg_to_rad(15.0), 0.2 * mz);
  };
  const CycleReport exact = run(0.0), dist = run(0.5 * med);
  const bool ok = exact.loss_depth < 0.02 && exact.loss_img < 0.02 && dist.loss_depth >= 5.0 * exact.loss_depth;
  return {ok, fmt("exact loss_depth %.5f loss_img %.5f; distorted loss_depth %.5f (%.1fx)", exact.loss_depth,
                  exact.loss_img, dist.loss_depth, dist.loss_depth / exact.loss_depth)};
}

// 7. Multi-focal selection picks the generating FOV.
Outcome mfl_correctness() {
  int hits = 0;
  std::string misses;
  for (int seed = 0; seed < 20; ++seed) {
    const Scene scene = random_scene(static_cast<std::uint64_t>(seed));
    const CameraIntrinsics cam = scene.default_camera();
    const OracleView view = oracle_render(scene, cam);
    auto p = make_provider(scene, cam);
    CycleConfig cfg;
    cfg.rng_seed = static_cast<std::uint64_t>(seed);
    const double fov = mfl_select(view.image, view.depth, *p, cfg).fov_star;
    if (fov == 60.0)
      ++hits;
    else
      misses += fmt(" seed%d->%g", seed, fov);
  }
  return {hits >= 18, fmt("%d/20 scenes%s", hits, misses.empty() ? "" : (";" + misses).c_str())};
}

// 8. Fixed-view FOV estimator.
Outcome fov_estimator() {
  int hits = 0;
  std::string misses;
  for (int seed = 0; seed < 50; ++seed) {
    const Scene scene = random_scene(static_cast<std::uint64_t>(seed));
    const CameraIntrinsics cam = scene.default_camera();
    const OracleView view = oracle_render(scene, cam);
    auto p = make_provider(scene, cam);
    const double fov = estimate_fov(view.image, view.depth, *p).fov_star;
    if (fov == 60.0)
      ++hits;
    else
      misses += fmt(" seed%d->%g", seed, fov);
  }
  return {hits >= 45, fmt("%d/50 scenes%s", hits, misses.empty() ? "" : (";" + misses).c_str())};
}

// 9. Domain affine recovery on distorted-oracle datasets.
Outcome affine_recovery() {
  const std::vector<std::pair<double, double>> pairs{{1.0, 0.5}, {0.5, -0.4}, {2.0, 0.8},
                                                     {1.5, -0.25}, {0.8, 0.3}, {1.2, 1.0}};
  bool ok = true;
  std::string detail;
  double worst_abs = 0.0, worst_rho = 0.0;
  for (auto [a0, beta0] : pairs) {
    std::vector<RecoverySample> data;
    std::vector<DepthMap> truth;
    std::vector<double> b0;
    for (int i = 0; i < 20; ++i) {
      const Scene s = random_scene(1000 + static_cast<std::uint64_t>(i));
      const CameraIntrinsics cam = s.default_camera();
      const OracleView v = oracle_render(s, cam);
      b0.push_back(beta0 * a0 * ssi_stats(v.depth).sigma);
      auto p = make_provider(s, cam, OracleMode::distorted(a0, b0.back()));
      data.push_back({v.image, predict_source_depth(*p, v.image), cam, p});
      truth.push_back(v.depth);
    }
    const RecoveryResult res = recover_affine(data, nullptr);
    double pair_abs = 0.0, pair_rho = 0.0;
    for (std::size_t i = 0; i < data.size(); ++i) {
      const AffineCoeffs c = res.affine.for_depth(data[i].raw_depth);
      const DepthMap corrected = apply_affine(data[i].raw_depth, c);
      pair_abs = std::max(pair_abs, eval_scale_aligned(corrected, truth[i]).absrel);
      const double rho0 = b0[i] / (a0 * median_of(truth[i]));
      const double rho_rec = -c.b / median_of(corrected);
      pair_rho = std::max(pair_rho, std::abs(rho_rec - rho0));
    }
    ok = ok && pair_abs < 0.01 && pair_rho < 0.05;
    worst_abs = std::max(worst_abs, pair_abs);
    worst_rho = std::max(worst_rho, pair_rho);
    detail += fmt(" (%.2g,%.2g):gamma %+.3f want %+.3f absrel %.4f drho %.3f;", a0, beta0,
                  res.affine.b_rel / res.affine.a, -beta0, pair_abs, pair_rho);
  }
  return {ok, fmt("worst AbsRel %.4f (< 0.01), worst shift ratio error %.4f (< 0.05);", worst_abs, worst_rho) + detail};
}

// 10. Metric definitions.
Outcome metric_definitions() {
  std::mt19937_64 rng(10);
  const DepthMap ds = random_map(rng, 64, 64, 0.5, 10.0, 0.1);
  const CameraIntrinsics cam = camera_from_fov(60.0, 64, 64);
  const double ar = absrel(scaled(ds, 1.1), ds);
  const double d1 = delta1(scaled(ds, 1.3), ds);
  const DepthMap pred = random_map(rng, 64, 64, 0.5, 10.0, 0.1);
  const EvalReport e1 = eval_scale_aligned(pred, ds), e2 = eval_scale_aligned(scaled(pred, 7.3), ds);
  const double inv = std::max(std::abs(e1.absrel - e2.absrel), std::abs(e1.delta1 - e2.delta1));
  const double rmse = pc_rmse(scaled(ds, 0.37), ds, cam);
  const bool ok = std::abs(ar - 0.1) <= 1e-12 && d1 == 0.0 && inv < 1e-9 && rmse < 1e-12;
  return {ok, fmt("absrel(1.1D) - 0.1 = %.2g, delta1(1.3D) = %g, rescale drift %.2g, pc_rmse(sD) = %.2g", ar - 0.1, d1,
                  inv, rmse)};
}

// 11. CLI reruns with the same seed write identical files.
std::map<std::string, std::string> snapshot(const fs::path& dir) {
  std::map<std::string, std::string> files;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (!e.is_regular_file()) continue;
    std::ifstream is(e.path(), std::ios::binary);
    std::ostringstream ss;
    ss << is.rdbuf();
    files[fs::relative(e.path(), dir).string()] = ss.str();
  }
  return files;
}

Outcome cli_reproducibility() {
  const fs::path dir = fs::temp_directory_path() / ("gpdepth-acceptance-" + std::to_string(::getpid()));
  const std::string cli = GPDEPTH_CLI_PATH;
  const std::string d = dir.string();
  const std::string img = d + "/data/images/scene_0000.png", depth = d + "/data/depth/scene_0000.pfm",
                    scene = d + "/data/scenes/scene_0000.json";
  const std::vector<std::string> cmds{
      "synth --count 2 --seed 7 --width 64 --height 64 --distort 1.5,0.3 --out " + d + "/data",
      "cycle --image " + img + " --provider oracle:" + scene + " --views 2 --seed 7 --out " + d + "/cycle_mfl.json",
      "cycle --image " + img + " --depth " + depth + " --fov 60 --views 2 --seed 7 --oracle-noise 0.01 --provider oracle:" +
          scene + " --out " + d + "/cycle_noisy.json",
      "render --image " + img + " --depth " + depth + " --fov 60 --theta 12 --t 0.4 --out " + d + "/render",
      "reconstruct --image " + img + " --depth " + depth + " --fov 60 --out " + d + "/cloud.ply",
      "estimate-fov --image " + img + " --depth " + depth + " --provider oracle:" + scene + " --out " + d + "/fov.json",
      "recover-affine --data " + d + "/data --provider oracle:" + d + "/data/scenes --views 1 --iters 3 --seed 7 --out " +
          d + "/recover.json",
      "eval --pred " + d + "/data/depth --gt " + d + "/data/gt --fov 60 --align scale-shift --out " + d + "/eval.json",
  };
  std::vector<std::map<std::string, std::string>> runs;
  for (int rep = 0; rep < 2; ++rep) {
    fs::remove_all(dir);
    fs::create_directories(dir);
    for (const auto& c : cmds) {
      const int status = std::system((cli + " " + c + " > /dev/null 2>&1").c_str());
      if (status != 0) {
        fs::remove_all(dir);
        return {false, "command failed: gpdepth " + c};
      }
    }
    runs.push_back(snapshot(dir));
  }
  fs::remove_all(dir);
  std::size_t differing = 0;
  for (const auto& [name, bytes] : runs[0]) {
    auto it = runs[1].find(name);
    differing += it == runs[1].end() || it->second != bytes;
  }
  differing += runs[1].size() - std::min(runs[1].size(), runs[0].size());
  return {differing == 0 && !runs[0].empty(),
          fmt("%zu commands, %zu output files, %zu differ", cmds.size(), runs[0].size(), differing)};
}

std::set<int> parse_list(const std::string& s) {
  std::set<int> out;
  std::stringstream ss(s);
  for (std::string tok; std::getline(ss, tok, ',');) out.insert(std::stoi(tok));
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  std::set<int> only, known;
  for (int i = 1; i + 1 < argc; i += 2) {
    const std::string flag = argv[i];
    if (flag == "--only")
      only = parse_list(argv[i + 1]);
    else if (flag == "--known-failure")
      known = parse_list(argv[i + 1]);
    else {
      std::fprintf(stderr, "usage: %s [--only N,...] [--known-failure N,...]\n", argv[0]);
      return 2;
    }
  }

  struct Criterion {
    int id;
    const char* name;
    double budget_s;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria{
      {1, "geometry round trip", 1.0, geometry_round_trip},
      {2, "pose algebra", 1.0, pose_algebra},
      {3, "SSI affine invariance", 5.0, ssi_invariance},
      {4, "least-squares exactness", 1.0, lstsq_exactness},
      {5, "identity-render fidelity", 1.0, identity_render},
      {6, "cycle zero point and distortion sensitivity", 10.0, cycle_calibration},
      {7, "multi-focal selection", 60.0, mfl_correctness},
      {8, "FOV estimator", 180.0, fov_estimator},
      {9, "affine recovery", 300.0, affine_recovery},
      {10, "metric definitions", 1.0, metric_definitions},
      {11, "CLI reproducibility", 60.0, cli_reproducibility},
  };

  int unexpected = 0;
  for (const auto& c : criteria) {
    if (!only.empty() && !only.count(c.id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = secs <= c.budget_s;
    const bool pass = o.pass && in_time;
    std::printf("%s criterion %d (%s): %s [%.2fs of %.0fs%s]%s\n", pass ? "PASS" : "FAIL", c.id, c.name,
                o.detail.c_str(), secs, c.budget_s, in_time ? "" : ", over budget",
                !pass && known.count(c.id) ? " (known failure)" : "");
    std::fflush(stdout);
    if (!pass && !known.count(c.id)) ++unexpected;
  }
  return unexpected == 0 ? 0 : 1;
}
