#include "evp/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace evp {

namespace {

/// Median as the order statistic at index n/2 (single element, so it scales
/// exactly under positive rescaling).
double median_of(std::vector<double>& v) {
  const size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + mid, v.end());
  return v[mid];
}

std::optional<double> mean_or_absent(double sum, long n) {
  if (n == 0) return std::nullopt;
  return sum / n;
}

}  // namespace

std::pair<DepthMap, double> median_scale(const DepthMap& pred,
                                         const DepthMap& gt,
                                         const Mask& valid) {
  if (!pred.same_size(gt) || !pred.same_size(valid))
    throw std::invalid_argument("median_scale: dimension mismatch");
  std::vector<double> pv, gv;
  for (int y = 0; y < pred.height(); ++y) {
    for (int x = 0; x < pred.width(); ++x) {
      if (valid.at(x, y) <= 0.0) continue;
      pv.push_back(pred.at(x, y));
      gv.push_back(gt.at(x, y));
    }
  }
  if (pv.empty()) throw std::domain_error("median_scale: no valid pixels");
  const double mp = median_of(pv);
  const double mg = median_of(gv);
  if (!(mp > 0) || !(mg > 0))
    throw std::domain_error("median_scale: non-positive median");
  const double factor = mg / mp;
  DepthMap scaled = pred;
  for (int y = 0; y < pred.height(); ++y)
    for (int x = 0; x < pred.width(); ++x) scaled.at(x, y) *= factor;
  return {scaled, factor};
}

DepthEvalResult eval_depth(const DepthMap& pred, const DepthMap& gt,
                           const Mask& valid, double cap, double cap_min) {
  if (!pred.same_size(gt) || !pred.same_size(valid))
    throw std::invalid_argument("eval_depth: dimension mismatch");
  double abs_rel = 0, sq_rel = 0, sq = 0, sq_log = 0;
  long n = 0, n1 = 0, n2 = 0, n3 = 0;
  for (int y = 0; y < pred.height(); ++y) {
    for (int x = 0; x < pred.width(); ++x) {
      if (valid.at(x, y) <= 0.0) continue;
      if (!(gt.at(x, y) > 0))
        throw std::domain_error("eval_depth: non-positive ground truth");
      const double d_gt = std::clamp(gt.at(x, y), cap_min, cap);
      const double d_pr = std::clamp(pred.at(x, y), cap_min, cap);
      const double err = d_gt - d_pr;
      abs_rel += std::abs(err) / d_gt;
      sq_rel += err * err / d_gt;
      sq += err * err;
      const double le = std::log(d_gt) - std::log(d_pr);
      sq_log += le * le;
      const double ratio = std::max(d_pr / d_gt, d_gt / d_pr);
      if (ratio < 1.25) ++n1;
      if (ratio < 1.25 * 1.25) ++n2;
      if (ratio < 1.25 * 1.25 * 1.25) ++n3;
      ++n;
    }
  }
  if (n == 0) throw std::domain_error("eval_depth: no valid pixels");
  DepthEvalResult r;
  r.abs_rel = abs_rel / n;
  r.sq_rel = sq_rel / n;
  r.rmse = std::sqrt(sq / n);
  r.rmse_log = std::sqrt(sq_log / n);
  r.delta1 = static_cast<double>(n1) / n;
  r.delta2 = static_cast<double>(n2) / n;
  r.delta3 = static_cast<double>(n3) / n;
  return r;
}

SceneFlowEvalResult eval_scene_flow(const DepthMap& d1_pred,
                                    const DepthMap& d1_gt,
                                    const DepthMap& d2_pred,
                                    const DepthMap& d2_gt,
                                    const FlowField2D& flow_pred,
                                    const FlowField2D& flow_gt,
                                    const Mask& fg_mask, const Mask& valid,
                                    const SceneFlowOptions& opts) {
  if (!d1_pred.same_size(d1_gt) || !d1_pred.same_size(d2_pred) ||
      !d1_pred.same_size(d2_gt) || !d1_pred.same_size(fg_mask) ||
      !d1_pred.same_size(valid) || flow_pred.width() != d1_pred.width() ||
      flow_pred.height() != d1_pred.height() || !flow_pred.same_size(flow_gt))
    throw std::invalid_argument("eval_scene_flow: dimension mismatch");

  // sums/counts indexed by population: 0 = bg, 1 = fg.
  double s_d1[2] = {0, 0}, s_d2[2] = {0, 0}, s_fl[2] = {0, 0};
  long cnt[2] = {0, 0};
  for (int y = 0; y < d1_pred.height(); ++y) {
    for (int x = 0; x < d1_pred.width(); ++x) {
      if (valid.at(x, y) <= 0.0) continue;
      const int pop = fg_mask.at(x, y) > 0.5 ? 1 : 0;
      const double e1 = std::abs(d1_gt.at(x, y) - d1_pred.at(x, y));
      const double e2 = std::abs(d2_gt.at(x, y) - d2_pred.at(x, y));
      const double ef = (flow_gt.vec.at(x, y) - flow_pred.vec.at(x, y)).norm();
      if (opts.outlier_rate) {
        const double m1 = std::abs(d1_gt.at(x, y));
        const double m2 = std::abs(d2_gt.at(x, y));
        const double mf = flow_gt.vec.at(x, y).norm();
        s_d1[pop] += (e1 > 3.0 && e1 > 0.05 * m1) ? 1.0 : 0.0;
        s_d2[pop] += (e2 > 3.0 && e2 > 0.05 * m2) ? 1.0 : 0.0;
        s_fl[pop] += (ef > 3.0 && ef > 0.05 * mf) ? 1.0 : 0.0;
      } else {
        s_d1[pop] += e1;
        s_d2[pop] += e2;
        s_fl[pop] += ef;
      }
      ++cnt[pop];
    }
  }

  SceneFlowEvalResult r;
  r.d1.bg = mean_or_absent(s_d1[0], cnt[0]);
  r.d1.fg = mean_or_absent(s_d1[1], cnt[1]);
  r.d1.bg_fg = mean_or_absent(s_d1[0] + s_d1[1], cnt[0] + cnt[1]);
  r.d2.bg = mean_or_absent(s_d2[0], cnt[0]);
  r.d2.fg = mean_or_absent(s_d2[1], cnt[1]);
  r.d2.bg_fg = mean_or_absent(s_d2[0] + s_d2[1], cnt[0] + cnt[1]);
  r.fl.bg = mean_or_absent(s_fl[0], cnt[0]);
  r.fl.fg = mean_or_absent(s_fl[1], cnt[1]);
  r.fl.bg_fg = mean_or_absent(s_fl[0] + s_fl[1], cnt[0] + cnt[1]);
  return r;
}

SegEvalResult eval_segmentation(const Mask& pred, const Mask& gt) {
  if (!pred.same_size(gt))
    throw std::invalid_argument("eval_segmentation: dimension mismatch");
  // Confusion counts n[i][j]: class i in gt labeled as class j.
  long n[2][2] = {{0, 0}, {0, 0}};
  for (int y = 0; y < pred.height(); ++y) {
    for (int x = 0; x < pred.width(); ++x) {
      const int i = gt.at(x, y) > 0.5 ? 1 : 0;
      const int j = pred.at(x, y) > 0.5 ? 1 : 0;
      ++n[i][j];
    }
  }
  const long t0 = n[0][0] + n[0][1];
  const long t1 = n[1][0] + n[1][1];
  const long total = t0 + t1;

  SegEvalResult r;
  r.pixel_acc = static_cast<double>(n[0][0] + n[1][1]) / total;

  double mean_acc = 0, mean_iou = 0, fw_iou = 0;
  int n_classes = 0;
  for (int i = 0; i < 2; ++i) {
    const long ti = i == 0 ? t0 : t1;
    if (ti == 0) continue;  // class absent from ground truth
    ++n_classes;
    const long predicted_i = n[0][i] + n[1][i];
    const long union_i = ti + predicted_i - n[i][i];
    const double iou =
        union_i > 0 ? static_cast<double>(n[i][i]) / union_i : 0.0;
    mean_acc += static_cast<double>(n[i][i]) / ti;
    mean_iou += iou;
    fw_iou += static_cast<double>(ti) / total * iou;
  }
  if (n_classes == 0)
    throw std::domain_error("eval_segmentation: empty ground truth");
  r.mean_acc = mean_acc / n_classes;
  r.mean_iou = mean_iou / n_classes;
  r.fw_iou = fw_iou;
  return r;
}

}  // namespace evp
