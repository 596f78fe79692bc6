// Holistic 3D motion parser: visibility from forward/backward flow
// consistency, rigid-background motion, dynamic-object motion, and the
// flow-derived background motion estimate.

#ifndef EVP_HMP_HPP
#define EVP_HMP_HPP

#include "evp/geometry.hpp"
#include "evp/grids.hpp"

namespace evp {

struct HMPOutput {
  Mask visibility;
  MotionField3D rigid;            // M_b
  MotionField3D dynamic;          // M_d
  MotionField3D flow_background;  // M_b estimated from flow and both depths
};

/// Forward-backward flow consistency check:
///   ||F_fwd(p) + F_bwd(p + F_fwd(p))||^2 <
///       alpha1 * (||F_fwd(p)||^2 + ||F_bwd(p + F_fwd(p))||^2) + alpha2
/// F_bwd is sampled bilinearly; pixels whose forward flow leaves the image
/// get V = 0.
Mask visibility_mask(const FlowField2D& flow_fwd, const FlowField2D& flow_bwd,
                     double alpha1 = 0.01, double alpha2 = 0.5);

/// M_b(p) = V(p) (1 - S(p)) [T phi(p|D) - phi(p|D)].
MotionField3D rigid_motion(const DepthMap& depth_t, const PoseSE3& T,
                           const Mask& segment, const Mask& visibility,
                           const Intrinsics& K);

/// M_d(p) = V(p) S(p) [phi(p + F(p)|D_s) - phi(p|D_t)], with D_s sampled
/// bilinearly at p + F(p). Out-of-bounds samples contribute zero.
MotionField3D dynamic_motion(const DepthMap& depth_t, const DepthMap& depth_s,
                             const FlowField2D& flow, const Mask& segment,
                             const Mask& visibility, const Intrinsics& K);

/// M_b_hat(p) = V(p) (1 - S(p)) (phi(p + F(p)|D_s) - phi(p|D_t)).
MotionField3D flow_background_motion(const DepthMap& depth_t,
                                     const DepthMap& depth_s,
                                     const FlowField2D& flow,
                                     const Mask& segment,
                                     const Mask& visibility,
                                     const Intrinsics& K);

/// Runs the full parser: visibility from flow consistency, then the three
/// motion fields.
HMPOutput parse(const DepthMap& depth_t, const DepthMap& depth_s,
                const FlowField2D& flow_fwd, const FlowField2D& flow_bwd,
                const PoseSE3& T, const Mask& segment, const Intrinsics& K,
                double alpha1 = 0.01, double alpha2 = 0.5);

}  // namespace evp

#endif  // EVP_HMP_HPP
