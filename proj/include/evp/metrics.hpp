// Depth, scene-flow and foreground-segmentation evaluation metrics with
// median rescaling.

#ifndef EVP_METRICS_HPP
#define EVP_METRICS_HPP

#include <optional>
#include <utility>

#include "evp/grids.hpp"

namespace evp {

struct DepthEvalResult {
  double abs_rel = 0, sq_rel = 0, rmse = 0, rmse_log = 0;
  double delta1 = 0, delta2 = 0, delta3 = 0;
};

/// Mean-absolute-error statistics split by background / foreground /
/// combined. Empty populations are reported as absent.
struct SceneFlowEvalResult {
  struct Split {
    std::optional<double> bg, fg, bg_fg;
  };
  Split d1, d2, fl;
};

struct SegEvalResult {
  double pixel_acc = 0, mean_acc = 0, mean_iou = 0, fw_iou = 0;
};

/// Rescales pred so its median over valid pixels matches the ground-truth
/// median. Returns the scaled map and the factor.
std::pair<DepthMap, double> median_scale(const DepthMap& pred,
                                         const DepthMap& gt,
                                         const Mask& valid);

/// Depth metrics over valid pixels; both maps are clamped to
/// [cap_min, cap] first.
DepthEvalResult eval_depth(const DepthMap& pred, const DepthMap& gt,
                           const Mask& valid, double cap = 80.0,
                           double cap_min = 1e-3);

/// When true, D1/D2/FL are reported as KITTI-style outlier rates
/// (error > 3 px and > 5% of magnitude) instead of mean absolute errors.
struct SceneFlowOptions {
  bool outlier_rate = false;
};

SceneFlowEvalResult eval_scene_flow(const DepthMap& d1_pred,
                                    const DepthMap& d1_gt,
                                    const DepthMap& d2_pred,
                                    const DepthMap& d2_gt,
                                    const FlowField2D& flow_pred,
                                    const FlowField2D& flow_gt,
                                    const Mask& fg_mask, const Mask& valid,
                                    const SceneFlowOptions& opts = {});

/// Two-class (bg/fg) segmentation metrics from binary masks.
SegEvalResult eval_segmentation(const Mask& pred, const Mask& gt);

}  // namespace evp

#endif  // EVP_METRICS_HPP
