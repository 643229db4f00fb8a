#pragma once

// Command-line front end. Every subcommand writes its outputs under --out
// (a directory for image/depth products, a file for JSON reports; JSON goes to
// standard output when --out is omitted).

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "gpdepth/core.hpp"
#include "gpdepth/cycle.hpp"
#include "gpdepth/depthnorm.hpp"
#include "gpdepth/estimator.hpp"
#include "gpdepth/geometry.hpp"
#include "gpdepth/io.hpp"
#include "gpdepth/metrics.hpp"
#include "gpdepth/provider.hpp"
#include "gpdepth/renderer.hpp"
#include "gpdepth/scenes.hpp"

namespace gpdepth::cli {

namespace fs = std::filesystem;
using nlohmann::json;

enum ExitCode : int { kOk = 0, kUsage = 1, kData = 2, kDegenerate = 3 };

struct UsageError : Error {
  using Error::Error;
};

/// Options shared by the subcommands. Not every subcommand reads every field.
struct RunConfig {
  std::optional<double> fov;
  std::vector<double> fov_set;
  std::uint64_t seed = 0;
  double alpha = 1.0;
  double beta = 0.1;
  int splat = 3;
  std::string provider;
  std::string out;
  std::vector<double> oracle_distort;  // a, b
  double oracle_noise = 0.0;
};

// ---------------------------------------------------------------------------
// Provider specs: cmd:<command line> | dir:<directory> | oracle:<scene.json or directory>

struct ProviderSpec {
  std::string kind;
  std::string arg;
};

inline ProviderSpec parse_provider(const std::string& spec) {
  const auto colon = spec.find(':');
  if (colon == std::string::npos) throw UsageError("--provider must be cmd:<...>, dir:<...> or oracle:<...>");
  ProviderSpec p{spec.substr(0, colon), spec.substr(colon + 1)};
  if (p.kind != "cmd" && p.kind != "dir" && p.kind != "oracle")
    throw UsageError("unknown provider kind '" + p.kind + "'");
  if (p.arg.empty()) throw UsageError("--provider " + p.kind + ": missing argument");
  return p;
}

inline json read_json(const fs::path& path) {
  std::ifstream is(path);
  if (!is) throw DataError("cannot open " + path.string());
  try {
    return json::parse(is);
  } catch (const json::exception& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

inline Scene load_scene(const fs::path& path) { return scene_from_json(read_json(path)); }

inline OracleMode oracle_mode(const RunConfig& rc) {
  if (!rc.oracle_distort.empty() && rc.oracle_noise > 0.0)
    throw UsageError("--oracle-distort and --oracle-noise are exclusive");
  if (!rc.oracle_distort.empty()) return OracleMode::distorted(rc.oracle_distort[0], rc.oracle_distort[1]);
  if (rc.oracle_noise > 0.0) return OracleMode::noisy(rc.oracle_noise);
  return OracleMode::exact();
}

/// Provider for a single image. An oracle spec must name a scene file.
inline std::shared_ptr<DepthProvider> make_single_provider(const RunConfig& rc) {
  if (rc.provider.empty()) throw UsageError("--provider is required");
  const ProviderSpec p = parse_provider(rc.provider);
  if (p.kind == "cmd") return std::make_shared<CommandProvider>(CommandProvider::split_command(p.arg));
  if (p.kind == "dir") return std::make_shared<DirectoryProvider>(p.arg);
  const Scene scene = load_scene(p.arg);
  return make_provider(scene, scene.default_camera(), oracle_mode(rc));
}

inline json affine_json(const AffineCoeffs& c) { return {{"a", c.a}, {"b", c.b}}; }

inline json fov_losses_json(const std::vector<FovLoss>& v) {
  json j = json::array();
  for (const auto& f : v) j.push_back({{"fov", f.fov}, {"loss", f.loss}});
  return j;
}

inline json report_json(const CycleReport& r) {
  return {{"loss_img", r.loss_img},
          {"loss_depth", r.loss_depth},
          {"loss_total", r.loss_total},
          {"align", affine_json(r.align)},
          {"alignment_ok", r.alignment_ok},
          {"coverage_img", r.coverage_img},
          {"coverage_depth", r.coverage_depth},
          {"coverage_novel", r.coverage_novel},
          {"per_fov", fov_losses_json(r.per_fov)},
          {"fov", r.fov},
          {"chosen_fov", r.chosen_fov},
          {"theta_deg", rad_to_deg(r.theta)},
          {"t", r.t},
          {"min_z", r.min_z}};
}

inline json common_json(const RunConfig& rc) {
  json j{{"seed", rc.seed}, {"alpha", rc.alpha}, {"beta", rc.beta}, {"splat", rc.splat}};
  j["fov"] = rc.fov ? json(*rc.fov) : json(nullptr);
  j["fov_set"] = rc.fov_set;
  j["provider"] = rc.provider.empty() ? json(nullptr) : json(rc.provider);
  if (!rc.oracle_distort.empty()) j["oracle_distort"] = rc.oracle_distort;
  if (rc.oracle_noise > 0.0) j["oracle_noise"] = rc.oracle_noise;
  return j;
}

inline void emit_json(const json& j, const std::string& out, std::ostream& os) {
  const std::string text = j.dump(2) + "\n";
  if (out.empty()) {
    os << text;
    return;
  }
  const fs::path p(out);
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream f(p, std::ios::binary);
  if (!f) throw DataError("cannot write " + out);
  f << text;
}

inline fs::path require_out_dir(const RunConfig& rc) {
  if (rc.out.empty()) throw UsageError("--out is required");
  fs::create_directories(rc.out);
  return rc.out;
}

inline SplatConfig splat_config(const RunConfig& rc) {
  SplatConfig s;
  s.footprint = rc.splat;
  return s;
}

inline CameraIntrinsics camera_for(const RunConfig& rc, int width, int height) {
  if (!rc.fov) throw UsageError("--fov is required");
  return camera_from_fov(*rc.fov, width, height);
}

/// Depth from --depth when given, otherwise the provider's prediction for the
/// unmodified image.
inline DepthMap input_depth(const std::string& depth_path, DepthProvider* provider, const Image& image) {
  if (!depth_path.empty()) return io::read_depth(depth_path);
  if (!provider) throw UsageError("--depth or --provider is required");
  DepthMap d = predict_source_depth(*provider, image);
  detail::check_provider_output(d, image);
  return d;
}

// ---------------------------------------------------------------------------
// Subcommands

struct SynthArgs {
  int count = 1;
  int width = 128;
  int height = 128;
  bool calibration = false;
  std::vector<double> distort;  // a, b_rel: raw = a * D + b_rel * a * sigma(D)
};

inline int run_synth(const RunConfig& rc, const SynthArgs& sa, std::ostream& os) {
  const fs::path out = require_out_dir(rc);
  for (const char* sub : {"images", "depth", "gt", "scenes"}) fs::create_directories(out / sub);
  json index = json::array();
  for (int i = 0; i < sa.count; ++i) {
    const std::uint64_t seed = rc.seed + static_cast<std::uint64_t>(i);
    Scene scene = sa.calibration ? calibration_scene() : random_scene(seed, rc.fov.value_or(60.0), sa.width, sa.height);
    if (sa.calibration) {
      scene.fov_degrees = rc.fov.value_or(scene.fov_degrees);
      scene.width = sa.width;
      scene.height = sa.height;
    }
    const OracleView view = oracle_render(scene, scene.default_camera());
    DepthMap raw = view.depth;
    AffineCoeffs dist;
    if (!sa.distort.empty()) {
      dist = {sa.distort[0], sa.distort[1] * sa.distort[0] * ssi_stats(view.depth).sigma};
      raw = apply_affine(view.depth, dist);
    }
    char stem[32];
    std::snprintf(stem, sizeof stem, "scene_%04d", i);
    io::write_image(out / "images" / (std::string(stem) + ".png"), view.image);
    io::write_depth(out / "depth" / (std::string(stem) + ".pfm"), raw);
    io::write_depth(out / "gt" / (std::string(stem) + ".pfm"), view.depth);
    emit_json(scene_to_json(scene), (out / "scenes" / (std::string(stem) + ".json")).string(), os);
    index.push_back({{"stem", stem}, {"seed", seed}, {"distortion", affine_json(dist)}});
  }
  json cfg = common_json(rc);
  cfg.update({{"count", sa.count}, {"width", sa.width}, {"height", sa.height}, {"calibration", sa.calibration},
              {"distort", sa.distort}});
  emit_json({{"config", cfg}, {"scenes", index}}, (out / "synth.json").string(), os);
  return kOk;
}

struct ViewArgs {
  std::string image;
  std::string depth;
  std::optional<double> theta_deg;
  std::optional<double> t;
  int views = 1;
};

inline int run_reconstruct(const RunConfig& rc, const ViewArgs& va, std::ostream&) {
  if (rc.out.empty()) throw UsageError("--out is required");
  const Image image = io::read_image(va.image);
  const DepthMap depth = io::read_depth(va.depth);
  const PointCloud cloud = unproject(depth, camera_for(rc, image.width, image.height), image);
  const fs::path p(rc.out);
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  io::write_pointcloud(p, cloud);
  return kOk;
}

inline int run_render(const RunConfig& rc, const ViewArgs& va, std::ostream& os) {
  const fs::path out = require_out_dir(rc);
  const Image image = io::read_image(va.image);
  const DepthMap depth = io::read_depth(va.depth);
  const CameraIntrinsics cam = camera_for(rc, image.width, image.height);
  const PointCloud cloud = unproject(depth, cam, image);
  if (cloud.empty()) throw DataError("render: depth map has no valid pixels");
  const double mz = min_depth(cloud);
  const double theta = deg_to_rad(va.theta_deg.value_or(0.0));
  const double t = va.t.value_or(0.0);
  const RenderOutput r = render(cloud, novel_pose(theta, t, mz), cam, splat_config(rc));
  io::write_image(out / "image.png", r.image);
  io::write_depth(out / "depth.pfm", r.depth);
  io::write_mask(out / "mask.png", r.coverage, r.image.width, r.image.height);
  json cfg = common_json(rc);
  cfg.update({{"image", va.image}, {"depth", va.depth}, {"theta_deg", rad_to_deg(theta)}, {"t", t}});
  emit_json({{"config", cfg}, {"min_z", mz}, {"coverage", r.coverage_fraction()}}, (out / "render.json").string(),
            os);
  return kOk;
}

inline CycleConfig cycle_config(const RunConfig& rc, int views) {
  CycleConfig c;
  c.alpha = rc.alpha;
  c.beta = rc.beta;
  c.rng_seed = rc.seed;
  c.splat = splat_config(rc);
  c.views_per_image = views;
  if (!rc.fov_set.empty()) c.fov_candidates = rc.fov_set;
  return c;
}

inline int run_cycle(const RunConfig& rc, const ViewArgs& va, std::ostream& os) {
  const Image image = io::read_image(va.image);
  const auto provider = make_single_provider(rc);
  const DepthMap depth = input_depth(va.depth, provider.get(), image);
  const CycleConfig cc = cycle_config(rc, va.views);
  cc.validate();

  json cfg = common_json(rc);
  cfg.update({{"image", va.image}, {"depth", va.depth}, {"views", va.views}, {"fov_candidates", cc.fov_candidates}});
  json rep{{"config", cfg}};

  if (va.theta_deg.has_value() != va.t.has_value()) throw UsageError("--theta and --t must be given together");
  const bool fixed = va.theta_deg.has_value();
  cfg["theta_deg"] = fixed ? json(*va.theta_deg) : json(nullptr);
  cfg["t"] = fixed ? json(*va.t) : json(nullptr);
  rep["config"] = cfg;

  if (!rc.fov) {
    if (fixed) throw UsageError("--theta/--t need --fov; multi-focal selection samples its own views");
    const MflResult m = mfl_select(image, depth, *provider, cc);
    rep["fov_star"] = m.fov_star;
    rep["focal_star"] = m.focal_star;
    rep["loss_at_fstar"] = m.loss_at_fstar;
    rep["per_fov"] = fov_losses_json(m.per_fov);
    rep["report"] = report_json(m.report);
    rep["loss_total_final"] = total_loss(0.0, m.loss_at_fstar, cc.beta);
  } else {
    const CameraIntrinsics cam = camera_from_fov(*rc.fov, image.width, image.height);
    if (fixed) {
      rep["report"] = report_json(cycle_consistency(image, depth, cam, *provider, deg_to_rad(*va.theta_deg), *va.t, cc));
    } else {
      json views = json::array();
      double acc = 0.0;
      for (int v = 0; v < cc.views_per_image; ++v) {
        const CycleReport r = sampled_cycle(image, depth, cam, *provider, cc, v);
        acc += r.loss_total;
        views.push_back(report_json(r));
      }
      rep["views"] = views;
      rep["mean_loss_total"] = acc / cc.views_per_image;
    }
  }
  emit_json(rep, rc.out, os);
  return kOk;
}

struct FovArgs {
  std::string image;
  std::string depth;
  std::vector<double> shifts{-0.5, 0.5};
  std::vector<double> angles{-20.0, 20.0};
  std::string objective = "depth";
};

inline ConsistencyObjective objective_from(const std::string& s) {
  if (s == "depth") return ConsistencyObjective::depth;
  if (s == "image") return ConsistencyObjective::image;
  throw UsageError("--objective must be depth or image");
}

inline int run_estimate_fov(const RunConfig& rc, const FovArgs& fa, std::ostream& os) {
  const Image image = io::read_image(fa.image);
  const auto provider = make_single_provider(rc);
  const DepthMap depth = input_depth(fa.depth, provider.get(), image);
  FovEstimateConfig fc;
  if (!rc.fov_set.empty()) fc.candidates = rc.fov_set;
  fc.shift_factors = fa.shifts;
  fc.angles = fa.angles;
  fc.objective = objective_from(fa.objective);
  const FovEstimate est = estimate_fov(image, depth, *provider, fc, splat_config(rc));

  json cfg = common_json(rc);
  cfg.update({{"image", fa.image},
              {"depth", fa.depth},
              {"candidates", fc.candidates},
              {"shift_factors", fc.shift_factors},
              {"angles_deg", fc.angles},
              {"objective", fa.objective}});
  emit_json({{"config", cfg}, {"fov_star", est.fov_star}, {"per_candidate", fov_losses_json(est.per_candidate)}},
            rc.out, os);
  return kOk;
}

struct RecoverArgs {
  std::string data;
  std::string objective = "depth";
  int views = 2;
  int iters = 60;
};

inline std::vector<std::string> stems_in(const fs::path& dir, const std::string& ext) {
  if (!fs::is_directory(dir)) throw DataError("not a directory: " + dir.string());
  std::vector<std::string> stems;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.is_regular_file() && e.path().extension() == ext) stems.push_back(e.path().stem().string());
  std::sort(stems.begin(), stems.end());
  return stems;
}

/// Dataset layout: <data>/images/<stem>.png and <data>/depth/<stem>.pfm, with
/// optional <data>/scenes/<stem>.json supplying the camera. An oracle provider
/// spec names a directory of per-stem scene files.
inline int run_recover_affine(const RunConfig& rc, const RecoverArgs& ra, std::ostream& os) {
  if (rc.provider.empty()) throw UsageError("--provider is required");
  const ProviderSpec spec = parse_provider(rc.provider);
  const fs::path data(ra.data);
  const auto stems = stems_in(data / "depth", ".pfm");
  if (stems.empty()) throw DataError("recover-affine: no depth maps under " + (data / "depth").string());

  std::shared_ptr<DepthProvider> shared;
  if (spec.kind != "oracle") shared = make_single_provider(rc);

  std::vector<RecoverySample> samples;
  for (const auto& stem : stems) {
    RecoverySample s;
    s.image = io::read_image(data / "images" / (stem + ".png"));
    s.raw_depth = io::read_depth(data / "depth" / (stem + ".pfm"));
    const fs::path scene_file = data / "scenes" / (stem + ".json");
    if (rc.fov)
      s.cam = camera_from_fov(*rc.fov, s.image.width, s.image.height);
    else if (fs::exists(scene_file))
      s.cam = load_scene(scene_file).default_camera();
    if (spec.kind == "oracle") {
      const Scene scene = load_scene(fs::path(spec.arg) / (stem + ".json"));
      s.provider = make_provider(scene, scene.default_camera(), oracle_mode(rc));
    }
    samples.push_back(std::move(s));
  }

  RecoveryConfig cfg;
  cfg.objective = objective_from(ra.objective);
  cfg.views_per_image = ra.views;
  cfg.refine_iters = ra.iters;
  cfg.rng_seed = rc.seed;
  cfg.splat = splat_config(rc);
  if (!rc.fov_set.empty()) cfg.fov_candidates = rc.fov_set;
  const RecoveryResult res = recover_affine(samples, shared, cfg);

  json per = json::array();
  for (std::size_t i = 0; i < samples.size(); ++i)
    per.push_back({{"stem", stems[i]}, {"coeffs", affine_json(res.affine.for_depth(samples[i].raw_depth))}});
  json jc = common_json(rc);
  jc.update({{"data", ra.data},
             {"objective", ra.objective},
             {"views_per_image", cfg.views_per_image},
             {"refine_iters", cfg.refine_iters},
             {"grid_a", cfg.grid_a},
             {"grid_b_rel", cfg.grid_b},
             {"fov_candidates", cfg.fov_candidates}});
  emit_json({{"config", jc},
             {"a", res.affine.a},
             {"b_rel", res.affine.b_rel},
             {"objective", res.objective},
             {"grid_best", {{"a", res.grid_best.a}, {"b_rel", res.grid_best.b_rel}}},
             {"grid_objective", res.grid_objective},
             {"trace", res.trace},
             {"evaluations", res.evaluations},
             {"per_image", per}},
            rc.out, os);
  return kOk;
}

struct EvalArgs {
  std::string pred;
  std::string gt;
  std::string align = "scale";
};

inline json eval_json(const EvalReport& r) {
  json j{{"absrel", r.absrel},
         {"delta1", r.delta1},
         {"scale_used", r.scale_used},
         {"shift_used", r.shift_used},
         {"pixels_evaluated", r.pixels_evaluated}};
  j["pc_rmse"] = r.pc_rmse ? json(*r.pc_rmse) : json(nullptr);
  return j;
}

/// Accepts either two directories (matched by file stem) or two files.
inline int run_eval(const RunConfig& rc, const EvalArgs& ea, std::ostream& os) {
  if (ea.align != "scale" && ea.align != "scale-shift") throw UsageError("--align must be scale or scale-shift");
  std::vector<std::pair<std::string, std::pair<fs::path, fs::path>>> pairs;
  if (fs::is_directory(ea.pred)) {
    for (const auto& stem : stems_in(ea.pred, ".pfm")) {
      const fs::path g = fs::path(ea.gt) / (stem + ".pfm");
      if (!fs::exists(g)) throw DataError("eval: no ground truth for " + stem);
      pairs.push_back({stem, {fs::path(ea.pred) / (stem + ".pfm"), g}});
    }
    if (pairs.empty()) throw DataError("eval: no predictions under " + ea.pred);
  } else {
    pairs.push_back({fs::path(ea.pred).stem().string(), {ea.pred, ea.gt}});
  }

  json per = json::array();
  double sum_absrel = 0.0, sum_delta1 = 0.0, sum_rmse = 0.0;
  for (const auto& [stem, paths] : pairs) {
    const DepthMap d = io::read_depth(paths.first);
    const DepthMap g = io::read_depth(paths.second);
    std::optional<CameraIntrinsics> cam;
    if (rc.fov) cam = camera_from_fov(*rc.fov, g.width, g.height);
    const EvalReport r =
        ea.align == "scale" ? eval_scale_aligned(d, g, cam) : eval_scale_shift_aligned(d, g, cam);
    sum_absrel += r.absrel;
    sum_delta1 += r.delta1;
    if (r.pc_rmse) sum_rmse += *r.pc_rmse;
    json j = eval_json(r);
    j["stem"] = stem;
    per.push_back(j);
  }
  const double n = static_cast<double>(pairs.size());
  json mean{{"absrel", sum_absrel / n}, {"delta1", sum_delta1 / n}};
  mean["pc_rmse"] = rc.fov ? json(sum_rmse / n) : json(nullptr);
  json cfg = common_json(rc);
  cfg.update({{"pred", ea.pred}, {"gt", ea.gt}, {"align", ea.align}});
  json rep{{"config", cfg}, {"mean", mean}, {"per_image", per}};
  if (pairs.size() == 1) rep.update(per[0]);  // single-file form also reports at top level
  emit_json(rep, rc.out, os);
  return kOk;
}

// ---------------------------------------------------------------------------

inline void add_common(CLI::App* sub, RunConfig& rc) {
  sub->add_option("--fov", rc.fov, "horizontal field of view in degrees")->check(CLI::Range(1.0, 179.0));
  sub->add_option("--fov-set", rc.fov_set, "candidate fields of view in degrees")
      ->delimiter(',')
      ->check(CLI::Range(1.0, 179.0));
  sub->add_option("--seed", rc.seed, "random seed");
  sub->add_option("--alpha", rc.alpha, "image-term weight")->check(CLI::NonNegativeNumber);
  sub->add_option("--beta", rc.beta, "consistency-term weight")->check(CLI::NonNegativeNumber);
  sub->add_option("--splat", rc.splat, "splat footprint in pixels")->check(CLI::IsMember({1, 3, 5}));
  sub->add_option("--provider", rc.provider, "cmd:<command> | dir:<directory> | oracle:<scene.json or directory>");
  sub->add_option("--oracle-distort", rc.oracle_distort, "oracle reports a*D+b (a,b)")
      ->delimiter(',')
      ->expected(2);
  sub->add_option("--oracle-noise", rc.oracle_noise, "oracle multiplicative noise sigma")
      ->check(CLI::NonNegativeNumber);
  sub->add_option("--out", rc.out, "output file or directory");
}

inline int cli_main(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Geometry-preserving depth: unproject, render, cycle consistency, FOV and affine estimation"};
  app.name("gpdepth");
  app.require_subcommand(1);

  RunConfig rc;
  SynthArgs sa;
  ViewArgs va;
  FovArgs fa;
  RecoverArgs ra;
  EvalArgs ea;

  auto* synth = app.add_subcommand("synth", "write synthetic scenes: images/, depth/, gt/, scenes/");
  add_common(synth, rc);
  synth->add_option("--count", sa.count, "number of scenes")->check(CLI::PositiveNumber);
  synth->add_option("--width", sa.width)->check(CLI::Range(8, 4096));
  synth->add_option("--height", sa.height)->check(CLI::Range(8, 4096));
  synth->add_flag("--calibration", sa.calibration, "emit the fixed calibration scene");
  synth->add_option("--distort", sa.distort, "raw depth = a*D + b_rel*a*sigma(D) (a,b_rel)")
      ->delimiter(',')
      ->expected(2);

  auto add_view = [&](CLI::App* sub, bool need_depth) {
    add_common(sub, rc);
    sub->add_option("--image", va.image, "input PNG")->required()->check(CLI::ExistingFile);
    auto* d = sub->add_option("--depth", va.depth, "input PFM depth")->check(CLI::ExistingFile);
    if (need_depth) d->required();
  };
  auto* reconstruct = app.add_subcommand("reconstruct", "unproject image and depth to a PLY point cloud");
  add_view(reconstruct, true);
  auto* rend = app.add_subcommand("render", "render a novel view: image.png, depth.pfm, mask.png");
  add_view(rend, true);
  rend->add_option("--theta", va.theta_deg, "rotation about the vertical axis in degrees");
  rend->add_option("--t", va.t, "forward translation in scene units");
  auto* cyc = app.add_subcommand("cycle", "run the consistency cycle and report its losses");
  add_view(cyc, false);
  cyc->add_option("--theta", va.theta_deg, "rotation in degrees (sampled when omitted)");
  cyc->add_option("--t", va.t, "translation in scene units (sampled when omitted)");
  cyc->add_option("--views", va.views, "sampled views")->check(CLI::PositiveNumber);

  auto* est = app.add_subcommand("estimate-fov", "pick the FOV with the lowest mean consistency loss");
  add_common(est, rc);
  est->add_option("--image", fa.image, "input PNG")->required()->check(CLI::ExistingFile);
  est->add_option("--depth", fa.depth, "input PFM depth")->check(CLI::ExistingFile);
  est->add_option("--shifts", fa.shifts, "translations in units of min depth")->delimiter(',');
  est->add_option("--angles", fa.angles, "rotations in degrees")->delimiter(',');
  est->add_option("--objective", fa.objective)->check(CLI::IsMember({"depth", "image"}));

  auto* rec = app.add_subcommand("recover-affine", "recover one scale/shift correction for a dataset");
  add_common(rec, rc);
  rec->add_option("--data", ra.data, "dataset directory")->required()->check(CLI::ExistingDirectory);
  rec->add_option("--objective", ra.objective)->check(CLI::IsMember({"depth", "image"}));
  rec->add_option("--views", ra.views, "views per image")->check(CLI::PositiveNumber);
  rec->add_option("--iters", ra.iters, "refinement iterations")->check(CLI::NonNegativeNumber);

  auto* ev = app.add_subcommand("eval", "AbsRel, delta1 and point-cloud RMSE of predictions");
  add_common(ev, rc);
  ev->add_option("--pred", ea.pred, "prediction PFM or directory")->required()->check(CLI::ExistingPath);
  ev->add_option("--gt", ea.gt, "ground-truth PFM or directory")->required()->check(CLI::ExistingPath);
  ev->add_option("--align", ea.align)->check(CLI::IsMember({"scale", "scale-shift"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*synth) return run_synth(rc, sa, out);
    if (*reconstruct) return run_reconstruct(rc, va, out);
    if (*rend) return run_render(rc, va, out);
    if (*cyc) return run_cycle(rc, va, out);
    if (*est) return run_estimate_fov(rc, fa, out);
    if (*rec) return run_recover_affine(rc, ra, out);
    if (*ev) return run_eval(rc, ea, out);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n" << app.help();
    return kUsage;
  } catch (const DegenerateViewError& e) {
    err << "degenerate geometry: " << e.what() << "\n";
    return kDegenerate;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kData;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return kData;
  }
  return kUsage;
}

}  // namespace gpdepth::cli
