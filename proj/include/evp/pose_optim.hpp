// Direct camera-motion recovery by minimizing the view-synthesis cost over
// se(3), coarse-to-fine over an image pyramid.

#ifndef EVP_POSE_OPTIM_HPP
#define EVP_POSE_OPTIM_HPP

#include <vector>

#include "evp/geometry.hpp"
#include "evp/grids.hpp"

namespace evp {

struct OptimSettings {
  int max_iters = 100;        // per pyramid level
  double initial_step = 1e-2;
  double step_decrease = 0.5;
  double step_increase = 1.1;
  double tolerance = 1e-8;    // convergence threshold on loss decrease
  int n_levels = 4;
  double beta = 0.5;

  void validate() const;
};

struct PoseEstimate {
  PoseSE3 pose;
  double final_loss = 0;
  int iterations = 0;
  std::vector<std::vector<double>> level_traces;  // loss trace per level
};

/// Gradient descent with backtracking line search on the twist
/// parameterization (left update T <- exp(step * direction) * T),
/// coarse-to-fine. The optional `weights` mask down-weights pixels (e.g.
/// moving objects) in the cost.
PoseEstimate estimate_pose(const ImageBuf& img_t, const ImageBuf& img_s,
                           const DepthMap& depth_t, const Intrinsics& K,
                           const PoseSE3& init, const OptimSettings& settings,
                           const Mask* weights = nullptr);

/// (rotation angle of R_true^-1 R_est, ||t_est - t_true||).
std::pair<double, double> pose_error(const PoseSE3& estimate,
                                     const PoseSE3& truth);

}  // namespace evp

#endif  // EVP_POSE_OPTIM_HPP
