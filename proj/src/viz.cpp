#include "evp/viz.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <vector>

namespace evp {

namespace {

// Middlebury-style color wheel: RY/YG/GC/CB/BM/MR segments.
struct ColorWheel {
  std::vector<std::array<double, 3>> colors;

  ColorWheel() {
    const int RY = 15, YG = 6, GC = 4, CB = 11, BM = 13, MR = 6;
    auto seg = [&](int n, int c_from, int c_to, bool up) {
      for (int i = 0; i < n; ++i) {
        std::array<double, 3> c{0, 0, 0};
        if (up) {
          c[c_from] = 1.0;
          c[c_to] = double(i) / n;
        } else {
          c[c_from] = 1.0 - double(i) / n;
          c[c_to] = 1.0;
        }
        colors.push_back(c);
      }
    };
    seg(RY, 0, 1, true);
    seg(YG, 0, 1, false);
    seg(GC, 1, 2, true);
    seg(CB, 1, 2, false);
    seg(BM, 2, 0, true);
    seg(MR, 2, 0, false);
  }

  std::array<double, 3> lookup(double angle_frac) const {
    const double f = angle_frac * colors.size();
    const int i = std::min<int>(static_cast<int>(f), colors.size() - 1);
    const int j = (i + 1) % colors.size();
    const double t = f - i;
    std::array<double, 3> c;
    for (int k = 0; k < 3; ++k)
      c[k] = (1 - t) * colors[i][k] + t * colors[j][k];
    return c;
  }
};

}  // namespace

ImageBuf visualize_flow(const FlowField2D& flow, double max_flow) {
  static const ColorWheel wheel;
  if (max_flow <= 0) {
    for (int y = 0; y < flow.height(); ++y)
      for (int x = 0; x < flow.width(); ++x)
        if (flow.valid.at(x, y))
          max_flow = std::max(max_flow, flow.vec.at(x, y).norm());
    if (max_flow <= 0) max_flow = 1.0;
  }
  ImageBuf img(flow.width(), flow.height(), 3, 0.0);
  for (int y = 0; y < flow.height(); ++y) {
    for (int x = 0; x < flow.width(); ++x) {
      if (!flow.valid.at(x, y)) continue;  // invalid pixels stay black
      const Eigen::Vector2d& f = flow.vec.at(x, y);
      const double mag = std::min(f.norm() / max_flow, 1.0);
      const double ang =
          (std::atan2(-f.y(), -f.x()) / M_PI + 1.0) / 2.0;  // [0,1)
      const auto c = wheel.lookup(std::min(ang, 0.999999));
      for (int k = 0; k < 3; ++k)
        img.at(x, y, k) = 1.0 - mag * (1.0 - c[k]);
    }
  }
  return img;
}

ImageBuf visualize_motion(const MotionField3D& motion, double max_motion) {
  if (max_motion <= 0) {
    for (int y = 0; y < motion.height(); ++y)
      for (int x = 0; x < motion.width(); ++x)
        max_motion =
            std::max(max_motion, motion.at(x, y).cwiseAbs().maxCoeff());
    if (max_motion <= 0) max_motion = 1.0;
  }
  ImageBuf img(motion.width(), motion.height(), 3, 0.5);
  for (int y = 0; y < motion.height(); ++y)
    for (int x = 0; x < motion.width(); ++x)
      for (int k = 0; k < 3; ++k)
        img.at(x, y, k) = std::clamp(
            0.5 + 0.5 * motion.at(x, y)[k] / max_motion, 0.0, 1.0);
  return img;
}

}  // namespace evp
