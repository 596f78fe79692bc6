// Command-line front end wiring the library into runnable pipeline stages.
//
// Exit codes: 0 success, 1 usage error, 2 data/format error, 3 numerical
// failure.

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "evp/config_io.hpp"
#include "evp/hmp.hpp"
#include "evp/image_io.hpp"
#include "evp/losses.hpp"
#include "evp/metrics.hpp"
#include "evp/pose_optim.hpp"
#include "evp/segmentation.hpp"
#include "evp/synth.hpp"
#include "evp/viz.hpp"

namespace fs = std::filesystem;
using namespace evp;

namespace {

std::string bundle_name(const std::string& stem, int index,
                        const std::string& ext) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "_%03d", index);
  return stem + buf + ext;
}

void write_pose_file(const std::string& path, const PoseSE3& T) {
  KeyValueFile kv;
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c)
      kv.set("r" + std::to_string(r) + std::to_string(c), T.rotation()(r, c));
  for (int i = 0; i < 3; ++i)
    kv.set("t" + std::to_string(i), T.translation()(i));
  kv.save(path);
}

PoseSE3 read_pose_file(const std::string& path) {
  const KeyValueFile kv = KeyValueFile::load(path);
  Eigen::Matrix3d R;
  Eigen::Vector3d t;
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c)
      R(r, c) = kv.get_double("r" + std::to_string(r) + std::to_string(c));
  for (int i = 0; i < 3; ++i) t(i) = kv.get_double("t" + std::to_string(i));
  return PoseSE3(R, t);
}

void write_flow_pfm(const std::string& dir, const std::string& stem, int index,
                    const FlowField2D& flow) {
  Grid<double> u(flow.width(), flow.height()), v(flow.width(), flow.height());
  for (int y = 0; y < flow.height(); ++y)
    for (int x = 0; x < flow.width(); ++x) {
      u.at(x, y) = flow.vec.at(x, y).x();
      v.at(x, y) = flow.vec.at(x, y).y();
    }
  write_pfm(dir + "/" + bundle_name(stem + "_u", index, ".pfm"), u);
  write_pfm(dir + "/" + bundle_name(stem + "_v", index, ".pfm"), v);
}

FlowField2D read_flow_pfm(const std::string& u_path,
                          const std::string& v_path) {
  const Grid<double> u = read_pfm(u_path);
  const Grid<double> v = read_pfm(v_path);
  if (!u.same_size(v)) throw FormatError("flow u/v size mismatch");
  FlowField2D flow(u.width(), u.height());
  for (int y = 0; y < u.height(); ++y)
    for (int x = 0; x < u.width(); ++x)
      flow.vec.at(x, y) = {u.at(x, y), v.at(x, y)};
  return flow;
}

Mask read_mask(const std::string& path) {
  const ImageBuf img = read_image(path);
  Mask m(img.width(), img.height(), 0.0);
  for (int y = 0; y < img.height(); ++y)
    for (int x = 0; x < img.width(); ++x)
      m.at(x, y) = img.at(x, y, 0) > 0.5 ? 1.0 : 0.0;
  return m;
}

void write_mask(const std::string& path, const Mask& m) {
  ImageBuf img(m.width(), m.height(), 1, 0.0);
  for (int y = 0; y < m.height(); ++y)
    for (int x = 0; x < m.width(); ++x)
      img.at(x, y, 0) = m.at(x, y) > 0.5 ? 1.0 : 0.0;
  write_image(path, img, 8);
}

/// Ground-truth bundle files as laid out by `synth`.
struct BundleFiles {
  Intrinsics K;
  ImageBuf img_t, img_s;
  DepthMap depth_t, depth_s;
  FlowField2D flow_fwd, flow_bwd;
  PoseSE3 T_ts;
  Mask segment;
};

BundleFiles load_bundle(const std::string& dir, int index) {
  BundleFiles b;
  b.K = read_intrinsics(dir + "/intrinsics.txt");
  b.img_t = read_image(dir + "/" + bundle_name("image_t", index, ".pgm"));
  b.img_s = read_image(dir + "/" + bundle_name("image_s", index, ".pgm"));
  b.depth_t = read_pfm(dir + "/" + bundle_name("depth_t", index, ".pfm"));
  b.depth_s = read_pfm(dir + "/" + bundle_name("depth_s", index, ".pfm"));
  b.flow_fwd =
      read_flow_pfm(dir + "/" + bundle_name("flow_fwd_u", index, ".pfm"),
                    dir + "/" + bundle_name("flow_fwd_v", index, ".pfm"));
  b.flow_bwd =
      read_flow_pfm(dir + "/" + bundle_name("flow_bwd_u", index, ".pfm"),
                    dir + "/" + bundle_name("flow_bwd_v", index, ".pfm"));
  b.T_ts = read_pose_file(dir + "/" + bundle_name("pose_ts", index, ".txt"));
  b.segment = read_mask(dir + "/" + bundle_name("segment", index, ".pgm"));
  return b;
}

void write_motion_pfm(const std::string& dir, const std::string& stem,
                      int index, const MotionField3D& m) {
  const char* axes[3] = {"_x", "_y", "_z"};
  for (int c = 0; c < 3; ++c) {
    Grid<double> g(m.width(), m.height());
    for (int y = 0; y < m.height(); ++y)
      for (int x = 0; x < m.width(); ++x) g.at(x, y) = m.at(x, y)[c];
    write_pfm(dir + "/" + bundle_name(stem + axes[c], index, ".pfm"), g);
  }
}

int cmd_synth(const std::string& spec_path, const std::string& out_dir,
              std::optional<uint64_t> seed) {
  SceneSpec spec = read_scene_spec(spec_path);
  if (seed) spec.texture_seed = *seed;
  fs::create_directories(out_dir);
  const std::vector<FrameBundle> bundles = synthesize_scene(spec);
  write_intrinsics(out_dir + "/intrinsics.txt", bundles.front().K);
  for (size_t i = 0; i < bundles.size(); ++i) {
    const FrameBundle& b = bundles[i];
    const int idx = static_cast<int>(i);
    write_image(out_dir + "/" + bundle_name("image_t", idx, ".pgm"), b.img_t,
                16);
    write_image(out_dir + "/" + bundle_name("image_s", idx, ".pgm"), b.img_s,
                16);
    write_pfm(out_dir + "/" + bundle_name("depth_t", idx, ".pfm"), b.depth_t);
    write_pfm(out_dir + "/" + bundle_name("depth_s", idx, ".pfm"), b.depth_s);
    write_flow_pfm(out_dir, "flow_fwd", idx, b.flow_fwd);
    write_flow_pfm(out_dir, "flow_bwd", idx, b.flow_bwd);
    write_pose_file(out_dir + "/" + bundle_name("pose_ts", idx, ".txt"),
                    b.T_ts);
    write_mask(out_dir + "/" + bundle_name("segment", idx, ".pgm"), b.segment);
    write_mask(out_dir + "/" + bundle_name("visibility", idx, ".pgm"),
               b.visibility);
    if (b.has_stereo) {
      write_image(out_dir + "/" + bundle_name("image_c", idx, ".pgm"), b.img_c,
                  16);
      write_pfm(out_dir + "/" + bundle_name("depth_c", idx, ".pfm"),
                b.depth_c);
      write_pose_file(out_dir + "/" + bundle_name("pose_tc", idx, ".txt"),
                      b.T_tc);
    }
  }
  std::cout << "wrote " << bundles.size() << " bundle(s) to " << out_dir
            << "\n";
  return 0;
}

int cmd_parse(const std::string& dir, int index, const std::string& out_dir,
              const std::string& report_path) {
  const BundleFiles b = load_bundle(dir, index);
  const HMPOutput h = parse(b.depth_t, b.depth_s, b.flow_fwd, b.flow_bwd,
                            b.T_ts, b.segment, b.K);
  fs::create_directories(out_dir);
  write_motion_pfm(out_dir, "mb", index, h.rigid);
  write_motion_pfm(out_dir, "md", index, h.dynamic);
  write_motion_pfm(out_dir, "mb_hat", index, h.flow_background);
  write_mask(out_dir + "/" + bundle_name("visibility", index, ".pgm"),
             h.visibility);

  double residual_max = 0, md_max = 0;
  for (int y = 0; y < h.rigid.height(); ++y)
    for (int x = 0; x < h.rigid.width(); ++x) {
      residual_max = std::max(residual_max,
                              (h.rigid.at(x, y) - h.flow_background.at(x, y))
                                  .cwiseAbs()
                                  .maxCoeff());
      md_max = std::max(md_max, h.dynamic.at(x, y).norm());
    }
  std::vector<std::pair<std::string, std::string>> kv;
  kv.emplace_back("residual_max", format_double(residual_max));
  kv.emplace_back("dynamic_motion_max", format_double(md_max));
  write_report(report_path, kv);
  std::cout << "residual_max = " << residual_max << "\n";
  return 0;
}

int cmd_loss(const std::string& dir, int index,
             const std::string& weights_path, const std::string& report_path) {
  const BundleFiles b = load_bundle(dir, index);
  const LossWeights w =
      weights_path.empty() ? LossWeights{} : read_loss_weights(weights_path);
  MonoInputs in{b.img_t,    b.img_s,    b.depth_t, b.depth_s, b.flow_fwd,
                b.flow_bwd, b.T_ts,     b.segment, b.K,       nullptr};
  LossBreakdown breakdown;
  const std::string stereo_img =
      dir + "/" + bundle_name("image_c", index, ".pgm");
  if (fs::exists(stereo_img)) {
    const ImageBuf img_c = read_image(stereo_img);
    const DepthMap depth_c =
        read_pfm(dir + "/" + bundle_name("depth_c", index, ".pfm"));
    const PoseSE3 T_tc =
        read_pose_file(dir + "/" + bundle_name("pose_tc", index, ".txt"));
    breakdown = loss_mono_stereo(in, img_c, depth_c, T_tc, w);
  } else {
    breakdown = loss_mono(in, w);
  }
  std::vector<std::pair<std::string, std::string>> kv;
  kv.emplace_back("lambda_st", format_double(w.lambda_st));
  kv.emplace_back("lambda_ms", format_double(w.lambda_ms));
  kv.emplace_back("lambda_vis", format_double(w.lambda_vis));
  kv.emplace_back("lambda_dne", format_double(w.lambda_dne));
  kv.emplace_back("lambda_vs", format_double(w.lambda_vs));
  kv.emplace_back("beta", format_double(w.beta));
  for (const auto& [k, v] : breakdown.items())
    kv.emplace_back(k, format_double(v));
  write_report(report_path, kv);
  for (const auto& [k, v] : breakdown.items())
    std::cout << k << " = " << v << "\n";
  return 0;
}

int cmd_optimize_pose(const std::string& dir, int index,
                      const std::string& report_path, int max_iters,
                      int n_levels) {
  const BundleFiles b = load_bundle(dir, index);
  OptimSettings settings;
  settings.max_iters = max_iters;
  settings.n_levels = n_levels;
  const PoseEstimate est = estimate_pose(b.img_t, b.img_s, b.depth_t, b.K,
                                         PoseSE3(), settings);
  const Twist xi = se3_log(est.pose);
  std::vector<std::pair<std::string, std::string>> kv;
  for (int i = 0; i < 6; ++i)
    kv.emplace_back("twist_" + std::to_string(i), format_double(xi[i]));
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c)
      kv.emplace_back("r" + std::to_string(r) + std::to_string(c),
                      format_double(est.pose.rotation()(r, c)));
  for (int i = 0; i < 3; ++i)
    kv.emplace_back("t" + std::to_string(i),
                    format_double(est.pose.translation()(i)));
  kv.emplace_back("final_loss", format_double(est.final_loss));
  kv.emplace_back("iterations", std::to_string(est.iterations));
  write_report(report_path, kv);
  std::cout << "final_loss = " << est.final_loss << " after "
            << est.iterations << " iterations\n";
  return 0;
}

int cmd_segment(const std::string& dir, int index, const std::string& out_path,
                const std::string& report_path, uint64_t seed) {
  const BundleFiles b = load_bundle(dir, index);
  SegmentParams params;
  params.gmm.seed = seed;
  const Mask mask = segment_moving_objects(b.depth_t, b.depth_s, b.flow_fwd,
                                           b.flow_bwd, b.T_ts, b.K, params);
  write_mask(out_path, mask);
  if (!report_path.empty()) {
    long fg = 0;
    for (int y = 0; y < mask.height(); ++y)
      for (int x = 0; x < mask.width(); ++x)
        if (mask.at(x, y) > 0.5) ++fg;
    write_report(report_path, {{"foreground_pixels", std::to_string(fg)}});
  }
  return 0;
}

int cmd_eval_depth(const std::string& pred_path, const std::string& gt_path,
                   const std::string& valid_path, double cap,
                   bool do_median_scale, const std::string& report_path) {
  DepthMap pred = read_pfm(pred_path);
  const DepthMap gt = read_pfm(gt_path);
  Mask valid(gt.width(), gt.height(), 1.0);
  if (!valid_path.empty()) valid = read_mask(valid_path);
  double factor = 1.0;
  if (do_median_scale) {
    auto [scaled, f] = median_scale(pred, gt, valid);
    pred = scaled;
    factor = f;
  }
  const DepthEvalResult r = eval_depth(pred, gt, valid, cap);
  std::vector<std::pair<std::string, std::string>> kv;
  kv.emplace_back("abs_rel", format_double(r.abs_rel));
  kv.emplace_back("sq_rel", format_double(r.sq_rel));
  kv.emplace_back("rmse", format_double(r.rmse));
  kv.emplace_back("rmse_log", format_double(r.rmse_log));
  kv.emplace_back("delta1", format_double(r.delta1));
  kv.emplace_back("delta2", format_double(r.delta2));
  kv.emplace_back("delta3", format_double(r.delta3));
  if (do_median_scale) kv.emplace_back("scale_factor", format_double(factor));
  write_report(report_path, kv);
  for (const auto& [k, v] : kv) std::cout << k << " = " << v << "\n";
  return 0;
}

std::string opt_str(const std::optional<double>& v) {
  return v ? format_double(*v) : "absent";
}

int cmd_eval_sceneflow(const std::string& d1_pred, const std::string& d1_gt,
                       const std::string& d2_pred, const std::string& d2_gt,
                       const std::string& fu_pred, const std::string& fv_pred,
                       const std::string& fu_gt, const std::string& fv_gt,
                       const std::string& fg_path,
                       const std::string& valid_path, bool outlier_rate,
                       const std::string& report_path) {
  const DepthMap p1 = read_pfm(d1_pred), g1 = read_pfm(d1_gt);
  const DepthMap p2 = read_pfm(d2_pred), g2 = read_pfm(d2_gt);
  const FlowField2D fp = read_flow_pfm(fu_pred, fv_pred);
  const FlowField2D fg_flow = read_flow_pfm(fu_gt, fv_gt);
  const Mask fg = read_mask(fg_path);
  Mask valid(g1.width(), g1.height(), 1.0);
  if (!valid_path.empty()) valid = read_mask(valid_path);
  SceneFlowOptions opts;
  opts.outlier_rate = outlier_rate;
  const SceneFlowEvalResult r =
      eval_scene_flow(p1, g1, p2, g2, fp, fg_flow, fg, valid, opts);
  std::vector<std::pair<std::string, std::string>> kv;
  kv.emplace_back("d1_bg", opt_str(r.d1.bg));
  kv.emplace_back("d1_fg", opt_str(r.d1.fg));
  kv.emplace_back("d1_bg_fg", opt_str(r.d1.bg_fg));
  kv.emplace_back("d2_bg", opt_str(r.d2.bg));
  kv.emplace_back("d2_fg", opt_str(r.d2.fg));
  kv.emplace_back("d2_bg_fg", opt_str(r.d2.bg_fg));
  kv.emplace_back("fl_bg", opt_str(r.fl.bg));
  kv.emplace_back("fl_fg", opt_str(r.fl.fg));
  kv.emplace_back("fl_bg_fg", opt_str(r.fl.bg_fg));
  write_report(report_path, kv);
  for (const auto& [k, v] : kv) std::cout << k << " = " << v << "\n";
  return 0;
}

int cmd_eval_seg(const std::string& pred_path, const std::string& gt_path,
                 const std::string& report_path) {
  const Mask pred = read_mask(pred_path);
  const Mask gt = read_mask(gt_path);
  const SegEvalResult r = eval_segmentation(pred, gt);
  std::vector<std::pair<std::string, std::string>> kv;
  kv.emplace_back("pixel_acc", format_double(r.pixel_acc));
  kv.emplace_back("mean_acc", format_double(r.mean_acc));
  kv.emplace_back("mean_iou", format_double(r.mean_iou));
  kv.emplace_back("fw_iou", format_double(r.fw_iou));
  write_report(report_path, kv);
  for (const auto& [k, v] : kv) std::cout << k << " = " << v << "\n";
  return 0;
}

int cmd_viz(const std::string& flow_u, const std::string& flow_v,
            const std::vector<std::string>& motion, const std::string& out) {
  if (!flow_u.empty()) {
    const FlowField2D f = read_flow_pfm(flow_u, flow_v);
    write_image(out, visualize_flow(f), 8);
    return 0;
  }
  if (motion.size() == 3) {
    const Grid<double> mx = read_pfm(motion[0]);
    const Grid<double> my = read_pfm(motion[1]);
    const Grid<double> mz = read_pfm(motion[2]);
    MotionField3D m(mx.width(), mx.height(), Eigen::Vector3d::Zero());
    for (int y = 0; y < mx.height(); ++y)
      for (int x = 0; x < mx.width(); ++x)
        m.at(x, y) = {mx.at(x, y), my.at(x, y), mz.at(x, y)};
    write_image(out, visualize_motion(m), 8);
    return 0;
  }
  throw CLI::ValidationError("viz",
                             "need either --flow-u/--flow-v or three --motion "
                             "files");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"3D motion decomposition, view-synthesis losses, pose "
               "optimization, segmentation and evaluation metrics"};
  app.require_subcommand(1);

  // synth
  std::string spec_path, out_dir = "synth_out";
  std::optional<uint64_t> seed;
  auto* synth = app.add_subcommand("synth", "render a synthetic scene");
  synth->add_option("--spec", spec_path, "scene spec file")->required();
  synth->add_option("--out", out_dir, "output directory");
  uint64_t seed_value = 0;
  auto* seed_opt = synth->add_option("--seed", seed_value, "texture seed");

  // parse
  std::string dir;
  int index = 0;
  std::string parse_out = "parse_out", report = "report.txt";
  auto* parse_cmd = app.add_subcommand("parse", "run the 3D motion parser");
  parse_cmd->add_option("--dir", dir, "bundle directory (synth output)")
      ->required();
  parse_cmd->add_option("--index", index, "bundle index");
  parse_cmd->add_option("--out", parse_out, "output directory");
  parse_cmd->add_option("--report", report, "report file");

  // loss
  std::string weights_path;
  auto* loss_cmd = app.add_subcommand("loss", "per-term loss breakdown");
  loss_cmd->add_option("--dir", dir, "bundle directory")->required();
  loss_cmd->add_option("--index", index, "bundle index");
  loss_cmd->add_option("--weights", weights_path, "loss weights file");
  loss_cmd->add_option("--report", report, "report file");

  // optimize-pose
  int max_iters = 100, n_levels = 4;
  auto* pose_cmd = app.add_subcommand("optimize-pose",
                                      "direct camera motion recovery");
  pose_cmd->add_option("--dir", dir, "bundle directory")->required();
  pose_cmd->add_option("--index", index, "bundle index");
  pose_cmd->add_option("--max-iters", max_iters, "iterations per level");
  pose_cmd->add_option("--levels", n_levels, "pyramid levels");
  pose_cmd->add_option("--report", report, "report file");

  // segment
  std::string mask_out = "segment.png";
  uint64_t seg_seed = 0;
  auto* seg_cmd = app.add_subcommand("segment", "moving object segmentation");
  seg_cmd->add_option("--dir", dir, "bundle directory")->required();
  seg_cmd->add_option("--index", index, "bundle index");
  seg_cmd->add_option("--out", mask_out, "output mask image");
  seg_cmd->add_option("--report", report, "report file");
  seg_cmd->add_option("--seed", seg_seed, "random seed");

  // eval-depth
  std::string pred_path, gt_path, valid_path;
  double cap = 80.0;
  bool do_median = false;
  auto* ed = app.add_subcommand("eval-depth", "depth error metrics");
  ed->add_option("--pred", pred_path, "predicted depth (PFM)")->required();
  ed->add_option("--gt", gt_path, "ground-truth depth (PFM)")->required();
  ed->add_option("--valid", valid_path, "validity mask image");
  ed->add_option("--cap", cap, "depth cap in meters");
  ed->add_flag("--median-scale", do_median, "median-rescale before eval");
  ed->add_option("--report", report, "report file");

  // eval-sceneflow
  std::string d1p, d1g, d2p, d2g, fup, fvp, fug, fvg, fg_path;
  bool outlier_rate = false;
  auto* es = app.add_subcommand("eval-sceneflow", "scene flow metrics");
  es->add_option("--d1-pred", d1p)->required();
  es->add_option("--d1-gt", d1g)->required();
  es->add_option("--d2-pred", d2p)->required();
  es->add_option("--d2-gt", d2g)->required();
  es->add_option("--flow-pred-u", fup)->required();
  es->add_option("--flow-pred-v", fvp)->required();
  es->add_option("--flow-gt-u", fug)->required();
  es->add_option("--flow-gt-v", fvg)->required();
  es->add_option("--fg", fg_path, "foreground mask image")->required();
  es->add_option("--valid", valid_path, "validity mask image");
  es->add_flag("--outlier-rate", outlier_rate,
               "KITTI-style outlier rates instead of mean errors");
  es->add_option("--report", report, "report file");

  // eval-seg
  auto* eg = app.add_subcommand("eval-seg", "segmentation metrics");
  eg->add_option("--pred", pred_path, "predicted mask image")->required();
  eg->add_option("--gt", gt_path, "ground-truth mask image")->required();
  eg->add_option("--report", report, "report file");

  // viz
  std::string flow_u, flow_v, viz_out = "viz.png";
  std::vector<std::string> motion_files;
  auto* viz_cmd = app.add_subcommand("viz", "color-coded visualization");
  viz_cmd->add_option("--flow-u", flow_u, "flow u component (PFM)");
  viz_cmd->add_option("--flow-v", flow_v, "flow v component (PFM)");
  viz_cmd->add_option("--motion", motion_files,
                      "three motion component PFMs (x y z)")
      ->expected(0, 3);
  viz_cmd->add_option("--out", viz_out, "output image");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*synth) {
      if (!seed_opt->empty()) seed = seed_value;
      return cmd_synth(spec_path, out_dir, seed);
    }
    if (*parse_cmd) return cmd_parse(dir, index, parse_out, report);
    if (*loss_cmd) return cmd_loss(dir, index, weights_path, report);
    if (*pose_cmd)
      return cmd_optimize_pose(dir, index, report, max_iters, n_levels);
    if (*seg_cmd) return cmd_segment(dir, index, mask_out, report, seg_seed);
    if (*ed)
      return cmd_eval_depth(pred_path, gt_path, valid_path, cap, do_median,
                            report);
    if (*es)
      return cmd_eval_sceneflow(d1p, d1g, d2p, d2g, fup, fvp, fug, fvg,
                                fg_path, valid_path, outlier_rate, report);
    if (*eg) return cmd_eval_seg(pred_path, gt_path, report);
    if (*viz_cmd) return cmd_viz(flow_u, flow_v, motion_files, viz_out);
  } catch (const FormatError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 2;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "file error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 2;
  } catch (const std::domain_error& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 3;
  }
  return 1;
}
