// Synthetic scene oracle: a textured fronto-parallel background plane plus a
// textured translating box, with analytically consistent images, depths,
// flows, masks and poses.

#ifndef EVP_SYNTH_HPP
#define EVP_SYNTH_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "evp/geometry.hpp"
#include "evp/grids.hpp"

namespace evp {

struct BoxSpec {
  double x0 = 0, y0 = 0;          // world meters at frame 0 (min corner)
  double size_x = 1, size_y = 1;  // world meters
  double depth = 4;               // world z at frame 0
  Eigen::Vector3d velocity = Eigen::Vector3d::Zero();  // meters per frame
};

struct SceneSpec {
  int width = 96, height = 64;
  double fx = 100, fy = 100, cx = 47.5, cy = 31.5;
  double bg_depth = 8;
  uint64_t texture_seed = 1;
  bool has_box = false;
  BoxSpec box;
  Twist cam_twist = Twist::Zero();  // camera motion per frame
  double baseline = 0;              // stereo baseline (0 = no stereo view)
  int n_frames = 2;

  Intrinsics intrinsics() const;
  void validate() const;
};

/// All ground truth for one (target, source) frame pair. Everything is
/// mutually consistent by construction.
struct FrameBundle {
  ImageBuf img_t, img_s, img_c;  // img_c present only when has_stereo
  bool has_stereo = false;
  DepthMap depth_t, depth_s, depth_c;
  FlowField2D flow_fwd, flow_bwd;
  PoseSE3 T_ts, T_tc;
  Mask segment;     // moving-object support in the target view
  Mask visibility;  // target pixels also observed in the source view
  Intrinsics K;
};

/// Renders n_frames - 1 consecutive frame pairs.
std::vector<FrameBundle> synthesize_scene(const SceneSpec& spec);

SceneSpec read_scene_spec(const std::string& path);
void write_scene_spec(const std::string& path, const SceneSpec& spec);

}  // namespace evp

#endif  // EVP_SYNTH_HPP
