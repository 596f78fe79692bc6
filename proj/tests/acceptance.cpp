// Acceptance gate: one pass/fail line per criterion. Exits nonzero when any
// criterion fails. argv[1] must be the path to the command-line tool, used by
// the end-to-end pipeline criterion.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "evp/config_io.hpp"
#include "evp/geometry.hpp"
#include "evp/hmp.hpp"
#include "evp/image_io.hpp"
#include "evp/losses.hpp"
#include "evp/metrics.hpp"
#include "evp/pose_optim.hpp"
#include "evp/segmentation.hpp"
#include "evp/synth.hpp"
#include "test_util.hpp"

namespace fs = std::filesystem;
using namespace evp;
using Clock = std::chrono::steady_clock;

namespace {

int g_failures = 0;

void report(int criterion, const std::string& name, bool pass,
            const std::string& detail = "") {
  std::cout << "criterion " << criterion << " (" << name
            << "): " << (pass ? "PASS" : "FAIL");
  if (!detail.empty()) std::cout << "  [" << detail << "]";
  std::cout << std::endl;
  if (!pass) ++g_failures;
}

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

SceneSpec rigid_scene(uint64_t seed, const Eigen::Vector3d& t,
                      const Eigen::Vector3d& w = Eigen::Vector3d::Zero()) {
  SceneSpec s;
  s.texture_seed = seed;
  s.bg_depth = 6.0;
  s.cam_twist.head<3>() = t;
  s.cam_twist.tail<3>() = w;
  return s;
}

SceneSpec box_scene(uint64_t seed, const Eigen::Vector3d& vel) {
  SceneSpec s;
  s.texture_seed = seed;
  s.bg_depth = 6.0;
  s.has_box = true;
  s.box.x0 = -0.9;
  s.box.y0 = -0.6;
  s.box.size_x = 1.2;
  s.box.size_y = 0.9;
  s.box.depth = 4.0;
  s.box.velocity = vel;
  return s;
}

// ---------------------------------------------------------------------------

void criterion_1_geometry() {
  const auto t0 = Clock::now();
  bool pass = true;
  std::ostringstream detail;

  const Intrinsics K(180, 220, 60.5, 40.5, 128, 80);
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> ux(0, 127), uy(0, 79), ud(0.3, 60);
  double proj_err = 0;
  for (int i = 0; i < 100000; ++i) {
    const Pixel p(ux(rng), uy(rng));
    const Pixel q = project(backproject(p, ud(rng), K), K);
    proj_err = std::max(proj_err, (q - p).cwiseAbs().maxCoeff());
  }
  pass = pass && proj_err < 1e-9;

  std::normal_distribution<double> n(0, 1);
  double se3_err = 0;
  for (int i = 0; i < 10000; ++i) {
    Twist xi;
    for (int k = 0; k < 6; ++k) xi[k] = n(rng);
    if (xi.tail<3>().norm() >= 3.0) xi.tail<3>() *= 2.9 / xi.tail<3>().norm();
    se3_err =
        std::max(se3_err, (se3_log(se3_exp(xi)) - xi).cwiseAbs().maxCoeff());
  }
  pass = pass && se3_err < 1e-10;

  const double dt = seconds_since(t0);
  pass = pass && dt < 5.0;
  detail << "proj_err=" << proj_err << " se3_err=" << se3_err << " t=" << dt
         << "s";
  report(1, "geometry round trips", pass, detail.str());
}

void criterion_2_hmp_zero_residual() {
  const auto t0 = Clock::now();
  bool pass = true;
  std::ostringstream detail;

  // 10 seeded rigid scenes: max |M_b - M_b_hat| < 1e-6 on visible pixels.
  double worst = 0;
  std::mt19937_64 rng(2);
  std::normal_distribution<double> n(0, 1);
  for (uint64_t seed = 1; seed <= 10; ++seed) {
    const Eigen::Vector3d t(0.04 * n(rng), 0.03 * n(rng), 0.04 * n(rng));
    const auto bundles = synthesize_scene(rigid_scene(seed, t));
    const FrameBundle& b = bundles.front();
    const HMPOutput out = parse(b.depth_t, b.depth_s, b.flow_fwd, b.flow_bwd,
                                b.T_ts, b.segment, b.K);
    for (int y = 0; y < b.K.height; ++y)
      for (int x = 0; x < b.K.width; ++x) {
        if (out.visibility.at(x, y) == 0.0) continue;
        worst = std::max(
            worst, (out.rigid.at(x, y) - out.flow_background.at(x, y))
                       .cwiseAbs()
                       .maxCoeff());
      }
  }
  pass = pass && worst < 1e-6;

  // Moving-box scenes: M_d equals the specified translation on the interior.
  double box_err = 0;
  const Eigen::Vector3d vels[] = {{0.1, 0, 0}, {-0.08, 0.05, 0}, {0.06, 0, 0}};
  for (int i = 0; i < 3; ++i) {
    const auto bundles = synthesize_scene(box_scene(20 + i, vels[i]));
    const FrameBundle& b = bundles.front();
    const HMPOutput out = parse(b.depth_t, b.depth_s, b.flow_fwd, b.flow_bwd,
                                b.T_ts, b.segment, b.K);
    const int r = 3;
    for (int y = r; y < b.K.height - r; ++y)
      for (int x = r; x < b.K.width - r; ++x) {
        bool all_box = true;
        for (int dy = -r; dy <= r && all_box; ++dy)
          for (int dx = -r; dx <= r && all_box; ++dx)
            all_box = b.segment.at(x + dx, y + dy) == 1.0;
        if (!all_box || out.visibility.at(x, y) == 0.0) continue;
        box_err = std::max(
            box_err,
            (out.dynamic.at(x, y) - vels[i]).cwiseAbs().maxCoeff());
      }
  }
  pass = pass && box_err < 1e-6;

  const double dt = seconds_since(t0);
  pass = pass && dt < 30.0;
  detail << "rigid_residual=" << worst << " box_err=" << box_err
         << " t=" << dt << "s";
  report(2, "parser zero-residual", pass, detail.str());
}

void criterion_3_loss_sanity() {
  bool pass = true;
  std::ostringstream detail;

  // similarity_cost(I, I) = 0 and ssim_map(I, I) = 1.
  const int W = 24, H = 18;
  ImageBuf img(W, H, 1, 0.0);
  for (int y = 0; y < H; ++y)
    for (int x = 0; x < W; ++x)
      img.at(x, y, 0) = 0.5 + 0.2 * std::sin(0.3 * x) * std::cos(0.4 * y);
  pass = pass && similarity_cost(img, img, 0.5, Mask(W, H, 1.0)) == 0.0;
  const Grid<double> s = ssim_map(img, img);
  for (int y = 0; y < H; ++y)
    for (int x = 0; x < W; ++x)
      pass = pass && std::abs(s.at(x, y) - 1.0) < 1e-12;

  // L_vis(S = 0.5) = log 2 within 1e-12.
  pass = pass && std::abs(loss_vis(Mask(9, 9, 0.5)) - std::log(2.0)) < 1e-12;

  // Recomposition of the weighted breakdown within 1e-12.
  const auto bundles = synthesize_scene(box_scene(30, {0.07, 0, 0}));
  const FrameBundle& b = bundles.front();
  MonoInputs in{b.img_t,    b.img_s, b.depth_t,  b.depth_s, b.flow_fwd,
                b.flow_bwd, b.T_ts,  b.segment,  b.K,       nullptr};

  // The default weights load from a config file and reach the report.
  const fs::path dir = fs::temp_directory_path() / "evp_acceptance";
  fs::create_directories(dir);
  const std::string wpath = (dir / "weights.txt").string();
  write_loss_weights(wpath, LossWeights{});
  const LossWeights w = read_loss_weights(wpath);
  pass = pass && w.lambda_st == 0.5 && w.lambda_ms == 0.25 &&
         w.lambda_vis == 0.8 && w.lambda_dne == 0.2 && w.lambda_vs == 1.0 &&
         w.beta == 0.5;

  const LossBreakdown r = loss_mono(in, w);
  double recomposed =
      w.lambda_st * r.st + w.lambda_ms * r.ms + w.lambda_vis * r.vis;
  for (int l = 0; l < w.n_scales; ++l)
    recomposed += w.lambda_dne * r.dne[l] + w.lambda_vs * r.bi_vs[l];
  pass = pass && std::abs(r.total - recomposed) <=
                     1e-12 * std::max(1.0, std::abs(r.total));

  const std::string rpath = (dir / "loss_report.txt").string();
  std::vector<std::pair<std::string, std::string>> kv;
  kv.emplace_back("lambda_st", format_double(w.lambda_st));
  kv.emplace_back("lambda_ms", format_double(w.lambda_ms));
  kv.emplace_back("lambda_vis", format_double(w.lambda_vis));
  kv.emplace_back("lambda_dne", format_double(w.lambda_dne));
  kv.emplace_back("lambda_vs", format_double(w.lambda_vs));
  kv.emplace_back("beta", format_double(w.beta));
  for (const auto& [k, v] : r.items()) kv.emplace_back(k, format_double(v));
  write_report(rpath, kv);
  const KeyValueFile back = KeyValueFile::load(rpath);
  pass = pass && back.get_double("lambda_st") == 0.5 &&
         back.get_double("lambda_ms") == 0.25 &&
         back.get_double("lambda_vis") == 0.8 &&
         back.get_double("lambda_dne") == 0.2 &&
         back.get_double("lambda_vs") == 1.0 &&
         back.get_double("beta") == 0.5 && back.has("total") &&
         back.has("st") && back.has("ms") && back.has("vis");

  detail << "total=" << r.total;
  report(3, "loss sanity and paper weights", pass, detail.str());
}

void criterion_4_gradient() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(4);
  std::normal_distribution<double> n(0, 1);
  const double h = 1e-5;
  const int W = 64, H = 48;
  const Intrinsics K(100, 100, 31.5, 23.5, W, H);
  const DepthMap depth(W, H, 5.0);
  // Interior-only weights: pixels whose source sample drifts near the image
  // border flip between valid and invalid under the probe, which central
  // differences cannot represent. The near-linear textures keep the bilinear
  // interpolant effectively C^1 (see test_util.hpp).
  Mask weights(W, H, 0.0);
  for (int y = 8; y < H - 8; ++y)
    for (int x = 8; x < W - 8; ++x) weights.at(x, y) = 1.0;
  double worst = 0;
  for (int trial = 0; trial < 20; ++trial) {
    const ImageBuf img_t = test::fd_texture(W, H, 300 + 2 * trial, 0.25, 0, 0);
    const ImageBuf img_s =
        test::fd_texture(W, H, 301 + 2 * trial, 0.70, 0.25, 0.12);
    Twist xi;
    for (int k = 0; k < 3; ++k) xi[k] = 0.05 * n(rng);
    for (int k = 3; k < 6; ++k) xi[k] = 0.01 * n(rng);
    const PoseSE3 T = se3_exp(xi);
    const double beta = (trial % 2) ? 0.5 : 0.0;

    const Twist g = grad_pose_vs(img_t, img_s, depth, T, K, beta, &weights);
    Twist fd;
    for (int k = 0; k < 6; ++k) {
      Twist dxi = Twist::Zero();
      dxi[k] = h;
      const double cp = view_synthesis_cost(img_t, img_s, depth,
                                            se3_exp(dxi).compose(T), K, beta,
                                            &weights);
      const double cm = view_synthesis_cost(img_t, img_s, depth,
                                            se3_exp(-dxi).compose(T), K, beta,
                                            &weights);
      fd[k] = (cp - cm) / (2 * h);
    }
    worst = std::max(worst, (g - fd).norm() / std::max(fd.norm(), 1e-12));
  }
  const double dt = seconds_since(t0);
  const bool pass = worst < 1e-4 && dt < 60.0;
  std::ostringstream detail;
  detail << "max_rel_err=" << worst << " t=" << dt << "s";
  report(4, "analytic pose gradient vs finite differences", pass,
         detail.str());
}

void criterion_5_pose_recovery() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(5);
  std::normal_distribution<double> n(0, 1);
  int good = 0;
  bool monotone = true;
  double worst_err = 0;
  for (int trial = 0; trial < 10; ++trial) {
    // Motions bounded by 20 cm translation and 5 degrees rotation.
    Eigen::Vector3d t(0.08 * n(rng), 0.05 * n(rng), 0.06 * n(rng));
    if (t.norm() > 0.2) t *= 0.2 / t.norm();
    Eigen::Vector3d w(0.015 * n(rng), 0.015 * n(rng), 0.015 * n(rng));
    const double max_rot = 5.0 * M_PI / 180.0;
    if (w.norm() > max_rot) w *= max_rot / w.norm();

    // Depth relief (static box at half the background depth) keeps lateral
    // translation and rotation separable; a single fronto-parallel plane
    // makes them nearly indistinguishable in image motion.
    SceneSpec spec = rigid_scene(400 + trial, t, w);
    spec.has_box = true;
    spec.box.depth = 3.0;
    spec.box.x0 = -0.45;
    spec.box.y0 = -0.3375;
    spec.box.size_x = 0.9;
    spec.box.size_y = 0.675;
    spec.box.velocity.setZero();
    const auto bundles = synthesize_scene(spec);
    const FrameBundle& b = bundles.front();
    OptimSettings s;
    s.max_iters = 2000;
    s.tolerance = 1e-14;
    const PoseEstimate est =
        estimate_pose(b.img_t, b.img_s, b.depth_t, b.K, PoseSE3(), s);
    const Twist err = se3_log(est.pose.compose(b.T_ts.inverse()));
    worst_err = std::max(worst_err, err.norm());
    if (err.norm() < 5e-3) ++good;
    for (const auto& trace : est.level_traces)
      for (size_t i = 1; i < trace.size(); ++i)
        monotone = monotone && trace[i] <= trace[i - 1];
  }
  const double dt = seconds_since(t0);
  const bool pass = good >= 9 && monotone && dt < 300.0;
  std::ostringstream detail;
  detail << "good=" << good << "/10 worst_twist_err=" << worst_err
         << " monotone=" << (monotone ? "yes" : "no") << " t=" << dt << "s";
  report(5, "pose recovery", pass, detail.str());
}

void criterion_6_segmentation() {
  const auto t0 = Clock::now();
  bool pass = true;
  std::ostringstream detail;

  // Oracle moving-box scenes: IoU > 0.9.
  double worst_iou = 1.0;
  const Eigen::Vector3d vels[] = {{0.12, 0, 0}, {-0.1, 0.06, 0}};
  for (int i = 0; i < 2; ++i) {
    const auto bundles = synthesize_scene(box_scene(60 + i, vels[i]));
    const FrameBundle& b = bundles.front();
    const Mask pred = segment_moving_objects(b.depth_t, b.depth_s, b.flow_fwd,
                                             b.flow_bwd, b.T_ts, b.K);
    long inter = 0, uni = 0;
    for (int y = 0; y < b.K.height; ++y)
      for (int x = 0; x < b.K.width; ++x) {
        const bool p = pred.at(x, y) > 0.5, t = b.segment.at(x, y) > 0.5;
        inter += p && t;
        uni += p || t;
      }
    worst_iou = std::min(worst_iou, double(inter) / uni);
  }
  pass = pass && worst_iou > 0.9;

  // EM log-likelihood monotone over iteration counts.
  std::mt19937_64 rng(6);
  std::normal_distribution<double> lo(0.05, 0.02), hi(0.4, 0.05);
  std::vector<double> samples;
  for (int i = 0; i < 400; ++i) samples.push_back(lo(rng));
  for (int i = 0; i < 300; ++i) samples.push_back(hi(rng));
  double prev = -1e300;
  bool monotone = true;
  for (int iters = 1; iters <= 20; ++iters) {
    GmmFitSettings gs;
    gs.max_iters = iters;
    gs.tol = 0.0;
    const Gmm2 g = fit_gmm2(samples, gs);
    double ll = 0;
    for (double x : samples) ll += g.log_likelihood(x);
    monotone = monotone && ll >= prev - 1e-9;
    prev = std::max(prev, ll);
  }
  pass = pass && monotone;

  // Graph-cut optimality against uniform and random labelings on small grids.
  bool optimal = true;
  std::uniform_real_distribution<double> u(0, 1);
  for (int grid = 0; grid < 3; ++grid) {
    const int W = 8 + 4 * grid, H = 8;  // up to 16x8 <= 16x16
    Grid<double> residual(W, H, 0.0);
    for (int y = 0; y < H; ++y)
      for (int x = 0; x < W; ++x) residual.at(x, y) = u(rng);
    Gmm2 g;
    g.mean0 = 0.3;
    g.mean1 = 0.7;
    g.var0 = g.var1 = 0.04;
    const double gamma = 0.3, scale = 0.1;
    const Mask cut = graph_cut_segment(residual, g, gamma, scale);
    const double e_cut = segmentation_energy(residual, g, gamma, scale, cut);
    optimal = optimal &&
              e_cut <= segmentation_energy(residual, g, gamma, scale,
                                           Mask(W, H, 0.0)) + 1e-9 &&
              e_cut <= segmentation_energy(residual, g, gamma, scale,
                                           Mask(W, H, 1.0)) + 1e-9;
    std::bernoulli_distribution coin(0.5);
    for (int trial = 0; trial < 10000 && optimal; ++trial) {
      Mask lab(W, H, 0.0);
      for (int y = 0; y < H; ++y)
        for (int x = 0; x < W; ++x) lab.at(x, y) = coin(rng) ? 1.0 : 0.0;
      optimal = segmentation_energy(residual, g, gamma, scale, lab) >=
                e_cut - 1e-9;
    }
  }
  pass = pass && optimal;

  const double dt = seconds_since(t0);
  pass = pass && dt < 120.0;
  detail << "worst_iou=" << worst_iou
         << " em_monotone=" << (monotone ? "yes" : "no")
         << " cut_optimal=" << (optimal ? "yes" : "no") << " t=" << dt << "s";
  report(6, "segmentation pipeline", pass, detail.str());
}

void criterion_7_metrics() {
  bool pass = true;

  const Mask all2(2, 1, 1.0);
  DepthMap gt(2, 1, 1.0), pred(2, 1, 1.0);
  gt.at(0, 0) = 2;
  gt.at(1, 0) = 4;
  pred.at(0, 0) = 1;
  pred.at(1, 0) = 5;
  const DepthEvalResult r = eval_depth(pred, gt, all2);
  pass = pass && r.abs_rel == 0.375 && r.sq_rel == 0.375 && r.rmse == 1.0 &&
         r.delta1 == 0.0;

  const DepthEvalResult perfect = eval_depth(gt, gt, all2);
  pass = pass && perfect.abs_rel == 0.0 && perfect.sq_rel == 0.0 &&
         perfect.rmse == 0.0 && perfect.rmse_log == 0.0 &&
         perfect.delta1 == 1.0 && perfect.delta2 == 1.0 &&
         perfect.delta3 == 1.0;

  // Segmentation fixture.
  Mask sgt(4, 4, 0.0), spred(4, 4, 0.0);
  for (int y = 0; y < 4; ++y) {
    for (int x = 0; x < 2; ++x) sgt.at(x, y) = 1.0;
    for (int x = 0; x < 3; ++x) spred.at(x, y) = 1.0;
  }
  const SegEvalResult sr = eval_segmentation(spred, sgt);
  pass = pass && sr.pixel_acc == 12.0 / 16 &&
         sr.mean_acc == (1.0 + 0.5) / 2 &&
         std::abs(sr.mean_iou - (8.0 / 12 + 4.0 / 8) / 2) < 1e-15;

  // median_scale equalizes medians exactly.
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.5, 20.0);
  DepthMap mp(7, 5, 1.0), mg(7, 5, 1.0);
  for (int y = 0; y < 5; ++y)
    for (int x = 0; x < 7; ++x) {
      mp.at(x, y) = u(rng);
      mg.at(x, y) = u(rng);
    }
  const Mask mall(7, 5, 1.0);
  const auto [scaled, factor] = median_scale(mp, mg, mall);
  std::vector<double> sv, gv;
  for (int y = 0; y < 5; ++y)
    for (int x = 0; x < 7; ++x) {
      sv.push_back(scaled.at(x, y));
      gv.push_back(mg.at(x, y));
    }
  std::sort(sv.begin(), sv.end());
  std::sort(gv.begin(), gv.end());
  pass = pass &&
         std::abs(sv[sv.size() / 2] - gv[gv.size() / 2]) <
             1e-12 * gv[gv.size() / 2];

  report(7, "metrics exactness", pass);
}

void criterion_8_formats_and_pipeline(const std::string& cli) {
  bool pass = true;
  std::ostringstream detail;
  const fs::path dir = fs::temp_directory_path() / "evp_acceptance_cli";
  fs::remove_all(dir);
  fs::create_directories(dir);

  // PFM bit-exact round trip.
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(-50, 50);
  Grid<double> g(11, 7, 0.0);
  for (int y = 0; y < 7; ++y)
    for (int x = 0; x < 11; ++x) g.at(x, y) = float(u(rng));
  const std::string pfm = (dir / "grid.pfm").string();
  write_pfm(pfm, g);
  const Grid<double> gb = read_pfm(pfm);
  for (int y = 0; y < 7; ++y)
    for (int x = 0; x < 11; ++x) pass = pass && gb.at(x, y) == g.at(x, y);

  // KITTI flow PNG within 1/64 px.
  FlowField2D f(9, 6);
  for (int y = 0; y < 6; ++y)
    for (int x = 0; x < 9; ++x) f.vec.at(x, y) = {u(rng) * 8, u(rng) * 8};
  const std::string fpng = (dir / "flow.png").string();
  write_kitti_flow_png(fpng, f);
  const FlowField2D fb = read_kitti_flow_png(fpng);
  for (int y = 0; y < 6; ++y)
    for (int x = 0; x < 9; ++x)
      pass = pass && (fb.vec.at(x, y) - f.vec.at(x, y)).cwiseAbs().maxCoeff() <=
                         1.0 / 64.0 + 1e-12;

  // 8-bit image bit-exact round trip.
  ImageBuf img(10, 8, 1, 0.0);
  for (size_t i = 0; i < img.size(); ++i) img.data()[i] = (rng() % 256) / 255.0;
  const std::string ipath = (dir / "img.pgm").string();
  write_image(ipath, img, 8);
  const ImageBuf ib = read_image(ipath);
  for (size_t i = 0; i < img.size(); ++i)
    pass = pass && ib.data()[i] == img.data()[i];

  // End-to-end CLI: synth -> parse -> eval, exit 0 and the residual bound
  // reproduced from files alone.
  SceneSpec spec = rigid_scene(500, {0.05, -0.02, 0.03});
  const std::string spec_path = (dir / "scene.txt").string();
  write_scene_spec(spec_path, spec);
  const std::string out_dir = (dir / "bundle").string();
  const std::string parse_dir = (dir / "parsed").string();
  const std::string parse_report = (dir / "parse_report.txt").string();
  const std::string eval_report = (dir / "eval_report.txt").string();

  auto run = [&](const std::string& cmd) {
    const int rc = std::system(cmd.c_str());
    return rc == 0;
  };
  const std::string q = "\"";
  bool cli_ok =
      run(q + cli + q + " synth --spec " + spec_path + " --out " + out_dir +
          " > /dev/null");
  cli_ok = cli_ok && run(q + cli + q + " parse --dir " + out_dir +
                         " --index 0 --out " + parse_dir + " --report " +
                         parse_report + " > /dev/null");
  cli_ok = cli_ok &&
           run(q + cli + q + " eval-depth --pred " + out_dir +
               "/depth_t_000.pfm --gt " + out_dir +
               "/depth_t_000.pfm --report " + eval_report + " > /dev/null");
  double residual = 1e30, abs_rel = 1e30, delta1 = 0;
  if (cli_ok) {
    residual = KeyValueFile::load(parse_report).get_double("residual_max");
    const KeyValueFile ev = KeyValueFile::load(eval_report);
    abs_rel = ev.get_double("abs_rel");
    delta1 = ev.get_double("delta1");
  }
  pass = pass && cli_ok && residual < 1e-6 && abs_rel == 0.0 && delta1 == 1.0;

  detail << "cli_ok=" << (cli_ok ? "yes" : "no") << " residual_max=" << residual;
  report(8, "format round trips and end-to-end pipeline", pass, detail.str());
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    std::cerr << "usage: evp_acceptance <path-to-cli>\n";
    return 1;
  }
  criterion_1_geometry();
  criterion_2_hmp_zero_residual();
  criterion_3_loss_sanity();
  criterion_4_gradient();
  criterion_5_pose_recovery();
  criterion_6_segmentation();
  criterion_7_metrics();
  criterion_8_formats_and_pipeline(argv[1]);
  if (g_failures > 0) {
    std::cout << g_failures << " criterion(s) failed" << std::endl;
    return 1;
  }
  std::cout << "all 8 criteria passed" << std::endl;
  return 0;
}
