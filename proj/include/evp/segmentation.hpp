// Moving-object segmentation from residual 3D flow: two-component GMM over
// the residual magnitude, refined by an exact graph cut on the pixel grid.

#ifndef EVP_SEGMENTATION_HPP
#define EVP_SEGMENTATION_HPP

#include <cstdint>
#include <vector>

#include "evp/geometry.hpp"
#include "evp/grids.hpp"

namespace evp {

/// 1-D two-component Gaussian mixture; component 0 is the lower-mean
/// (background) component.
struct Gmm2 {
  double mean0 = 0, mean1 = 0;
  double var0 = 1, var1 = 1;
  double weight0 = 0.5, weight1 = 0.5;

  double log_likelihood(double x) const;
  /// Per-component negative log posterior-unnormalized costs (-log w_k N_k).
  std::pair<double, double> component_costs(double x) const;
};

struct GmmFitSettings {
  int max_iters = 200;
  double tol = 1e-8;
  uint64_t seed = 0;
};

/// Per-pixel ||M_full - M_rigid||_2.
Grid<double> residual_flow(const MotionField3D& full,
                           const MotionField3D& rigid);

/// EM fit of a two-component 1-D GMM; the log-likelihood is non-decreasing
/// over iterations and components come back sorted by mean. Throws on
/// degenerate (all-equal) samples.
Gmm2 fit_gmm2(const std::vector<double>& samples,
              const GmmFitSettings& settings = {});

/// Exact binary labeling minimizing unary NLL costs plus a contrast-sensitive
/// Potts term gamma * exp(-delta^2 / scale) over 4-neighbor edges, via
/// max-flow. `contrast_scale` <= 0 selects 2 * mean(delta^2) over edges.
Mask graph_cut_segment(const Grid<double>& residual, const Gmm2& gmm,
                       double pairwise_weight, double contrast_scale = 0.0);

/// Energy of a labeling under the graph-cut model (exposed for testing).
double segmentation_energy(const Grid<double>& residual, const Gmm2& gmm,
                           double pairwise_weight, double contrast_scale,
                           const Mask& labels);

struct SegmentParams {
  double alpha1 = 0.01;   // visibility check
  double alpha2 = 0.5;
  double pairwise_weight = 2.0;
  double contrast_scale = 0.0;  // auto
  GmmFitSettings gmm;
};

/// Full pipeline: parse with S = 0, residual flow, GMM fit, graph cut.
/// Foreground is the higher-mean component.
Mask segment_moving_objects(const DepthMap& depth_t, const DepthMap& depth_s,
                            const FlowField2D& flow_fwd,
                            const FlowField2D& flow_bwd, const PoseSE3& T,
                            const Intrinsics& K,
                            const SegmentParams& params = {});

}  // namespace evp

#endif  // EVP_SEGMENTATION_HPP
