// View synthesis, the structural / smoothness / visibility / photometric loss
// terms, and the analytic pose-twist gradient of the view-synthesis cost.

#ifndef EVP_LOSSES_HPP
#define EVP_LOSSES_HPP

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "evp/geometry.hpp"
#include "evp/grids.hpp"

namespace evp {

struct LossWeights {
  double lambda_st = 0.5;
  double lambda_ms = 0.25;
  double lambda_vis = 0.8;
  double lambda_dne = 0.2;
  double lambda_vs = 1.0;
  double beta = 0.5;    // SSIM trade-off in the similarity function
  double alpha = 10.0;  // edge-affinity sharpness
  int n_scales = 4;

  void validate() const;
};

/// Absolute-position sampling grid (reuses the flow container: vec holds
/// target coordinates, not displacements).
struct SampledImage {
  ImageBuf image;
  Mask valid;
};

/// Bilinear interpolation of `img` at the absolute coordinates in `coords`.
/// Out-of-bounds samples get value 0 and valid = 0.
SampledImage bilinear_sample(const ImageBuf& img, const FlowField2D& coords);

/// Warps the source image into the target frame through depth and pose:
/// I_hat(p) = I_src(p + rigid_flow(p)).
SampledImage synthesize_view(const ImageBuf& src, const DepthMap& depth_t,
                             const PoseSE3& T, const Intrinsics& K);

/// Per-pixel SSIM (3x3 uniform window, c1 = 0.01^2, c2 = 0.03^2), averaged
/// over channels. Range [-1, 1]; symmetric in its arguments.
Grid<double> ssim_map(const ImageBuf& a, const ImageBuf& b);

/// Mean over valid pixels of |I - I_hat| + beta * (1 - SSIM)/2.
double similarity_cost(const ImageBuf& img, const ImageBuf& synth, double beta,
                       const Mask& valid);

/// Mean componentwise absolute difference between the two background-motion
/// estimates. When `valid` is given, only pixels with weight > 0 enter the
/// mean; otherwise all pixels count.
double loss_st(const MotionField3D& rigid, const MotionField3D& flow_bg,
               const Mask* valid = nullptr);

/// Motion magnitude plus edge-aware first-order smoothness of M_d over the
/// 4-neighborhood, affinity kappa = exp(-alpha * max(E)).
double loss_ms(const MotionField3D& dynamic, const EdgeMap& edges,
               double alpha);

/// Mean of -log(1 - S), S clamped at 1 - 1e-6.
double loss_vis(const Mask& segment);

/// Edge-aware first-order smoothness of inverse depth (surrogate for the
/// depth/normal/edge regularizers).
double loss_smooth_dne(const DepthMap& depth, const EdgeMap& edges,
                       double alpha);

/// Bi-directional view synthesis cost: similarity of I_t against the warp of
/// I_s plus similarity of I_s against the warp of I_t under the inverse pose.
double loss_bi_vs(const ImageBuf& img_t, const ImageBuf& img_s,
                  const DepthMap& depth_t, const DepthMap& depth_s,
                  const PoseSE3& T_ts, const Intrinsics& K, double beta);

/// Normalized image-gradient magnitude, used as the edge map when no edge
/// estimate is supplied.
EdgeMap edge_map_from_image(const ImageBuf& img);

/// Factor-2 area-average pyramid helpers.
ImageBuf downsample2(const ImageBuf& img);
DepthMap downsample2(const DepthMap& depth);

struct LossBreakdown {
  double total = 0;
  double st = 0;
  double ms = 0;
  double vis = 0;
  std::vector<double> dne;    // per pyramid level
  std::vector<double> bi_vs;  // per pyramid level
  std::vector<double> stereo_dne;
  std::vector<double> stereo_bi_vs;

  /// Flat key -> value view for reports.
  std::vector<std::pair<std::string, double>> items() const;
};

struct MonoInputs {
  ImageBuf img_t, img_s;
  DepthMap depth_t, depth_s;
  FlowField2D flow_fwd, flow_bwd;
  PoseSE3 T_ts;
  Mask segment;
  Intrinsics K;
  const EdgeMap* edges = nullptr;  // derived from img_t when null
};

/// L_mono: weighted sum of the single-scale motion terms and the multi-scale
/// smoothness and view-synthesis terms.
LossBreakdown loss_mono(const MonoInputs& in, const LossWeights& w);

/// L_mono plus the stereo-pair terms with the fixed stereo pose T_tc.
LossBreakdown loss_mono_stereo(const MonoInputs& in, const ImageBuf& img_c,
                               const DepthMap& depth_c, const PoseSE3& T_tc,
                               const LossWeights& w);

/// One-directional view-synthesis cost in the differentiable form used by the
/// pose optimizer: Charbonnier photometric distance plus beta*(1 - SSIM)/2,
/// averaged over valid pixels. `weights` optionally down-weights pixels.
double view_synthesis_cost(const ImageBuf& img_t, const ImageBuf& img_s,
                           const DepthMap& depth_t, const PoseSE3& T,
                           const Intrinsics& K, double beta,
                           const Mask* weights = nullptr);

/// Analytic gradient of view_synthesis_cost with respect to the
/// left-multiplied twist perturbation of T (T <- exp(d xi) * T).
Twist grad_pose_vs(const ImageBuf& img_t, const ImageBuf& img_s,
                   const DepthMap& depth_t, const PoseSE3& T,
                   const Intrinsics& K, double beta,
                   const Mask* weights = nullptr);

}  // namespace evp

#endif  // EVP_LOSSES_HPP
