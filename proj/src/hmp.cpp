#include "evp/hmp.hpp"

#include <cmath>
#include <optional>
#include <stdexcept>

namespace evp {

namespace {

void check_same_size(int w, int h, int w2, int h2, const char* what) {
  if (w != w2 || h != h2) throw std::invalid_argument(what);
}

/// Bilinear sample of a scalar grid at continuous (u, v); nullopt when the
/// sample footprint leaves the grid.
std::optional<double> sample_bilinear(const Grid<double>& g, double u,
                                      double v) {
  if (!(u >= 0.0) || !(v >= 0.0) || !(u <= g.width() - 1) ||
      !(v <= g.height() - 1))
    return std::nullopt;
  int x0 = static_cast<int>(std::floor(u));
  int y0 = static_cast<int>(std::floor(v));
  if (x0 > g.width() - 2) x0 = g.width() - 2;
  if (y0 > g.height() - 2) y0 = g.height() - 2;
  if (g.width() == 1) x0 = 0;
  if (g.height() == 1) y0 = 0;
  const int x1 = std::min(x0 + 1, g.width() - 1);
  const int y1 = std::min(y0 + 1, g.height() - 1);
  const double fx = u - x0;
  const double fy = v - y0;
  return (1 - fx) * (1 - fy) * g.at(x0, y0) + fx * (1 - fy) * g.at(x1, y0) +
         (1 - fx) * fy * g.at(x0, y1) + fx * fy * g.at(x1, y1);
}

std::optional<Eigen::Vector2d> sample_bilinear(const FlowField2D& f, double u,
                                               double v) {
  if (!(u >= 0.0) || !(v >= 0.0) || !(u <= f.width() - 1) ||
      !(v <= f.height() - 1))
    return std::nullopt;
  int x0 = static_cast<int>(std::floor(u));
  int y0 = static_cast<int>(std::floor(v));
  if (x0 > f.width() - 2) x0 = std::max(f.width() - 2, 0);
  if (y0 > f.height() - 2) y0 = std::max(f.height() - 2, 0);
  const int x1 = std::min(x0 + 1, f.width() - 1);
  const int y1 = std::min(y0 + 1, f.height() - 1);
  if (!f.valid.at(x0, y0) || !f.valid.at(x1, y0) || !f.valid.at(x0, y1) ||
      !f.valid.at(x1, y1))
    return std::nullopt;
  const double fx = u - x0;
  const double fy = v - y0;
  return ((1 - fx) * (1 - fy) * f.vec.at(x0, y0) +
          fx * (1 - fy) * f.vec.at(x1, y0) + (1 - fx) * fy * f.vec.at(x0, y1) +
          fx * fy * f.vec.at(x1, y1))
      .eval();
}

/// phi(p + F(p) | D_s) - phi(p | D_t), or zero when the flow target cannot be
/// sampled. Returns whether the sample was valid.
bool flow_endpoint_delta(const DepthMap& depth_t, const DepthMap& depth_s,
                         const FlowField2D& flow, const Intrinsics& K, int x,
                         int y, Eigen::Vector3d* delta) {
  delta->setZero();
  if (!flow.valid.at(x, y)) return false;
  const Pixel p(x, y);
  const Pixel q = p + flow.vec.at(x, y);
  const auto ds = sample_bilinear(depth_s, q.x(), q.y());
  if (!ds || !(*ds > 0)) return false;
  *delta = backproject(q, *ds, K) - backproject(p, depth_t.at(x, y), K);
  return true;
}

}  // namespace

Mask visibility_mask(const FlowField2D& flow_fwd, const FlowField2D& flow_bwd,
                     double alpha1, double alpha2) {
  if (!flow_fwd.same_size(flow_bwd))
    throw std::invalid_argument("visibility_mask: dimension mismatch");
  Mask vis(flow_fwd.width(), flow_fwd.height(), 0.0);
  for (int y = 0; y < flow_fwd.height(); ++y) {
    for (int x = 0; x < flow_fwd.width(); ++x) {
      if (!flow_fwd.valid.at(x, y)) continue;
      const Eigen::Vector2d f = flow_fwd.vec.at(x, y);
      const auto b = sample_bilinear(flow_bwd, x + f.x(), y + f.y());
      if (!b) continue;
      const double lhs = (f + *b).squaredNorm();
      const double rhs = alpha1 * (f.squaredNorm() + b->squaredNorm()) + alpha2;
      if (lhs < rhs) vis.at(x, y) = 1.0;
    }
  }
  return vis;
}

MotionField3D rigid_motion(const DepthMap& depth_t, const PoseSE3& T,
                           const Mask& segment, const Mask& visibility,
                           const Intrinsics& K) {
  check_same_size(depth_t.width(), depth_t.height(), segment.width(),
                  segment.height(), "rigid_motion: dimension mismatch");
  check_same_size(depth_t.width(), depth_t.height(), visibility.width(),
                  visibility.height(), "rigid_motion: dimension mismatch");
  MotionField3D out(depth_t.width(), depth_t.height(),
                    Eigen::Vector3d::Zero());
  for (int y = 0; y < depth_t.height(); ++y) {
    for (int x = 0; x < depth_t.width(); ++x) {
      const double w = visibility.at(x, y) * (1.0 - segment.at(x, y));
      if (w == 0.0) continue;
      const Point3 X = backproject(Pixel(x, y), depth_t.at(x, y), K);
      out.at(x, y) = w * (transform(T, X) - X);
    }
  }
  return out;
}

MotionField3D dynamic_motion(const DepthMap& depth_t, const DepthMap& depth_s,
                             const FlowField2D& flow, const Mask& segment,
                             const Mask& visibility, const Intrinsics& K) {
  check_same_size(depth_t.width(), depth_t.height(), flow.width(),
                  flow.height(), "dynamic_motion: dimension mismatch");
  check_same_size(depth_t.width(), depth_t.height(), segment.width(),
                  segment.height(), "dynamic_motion: dimension mismatch");
  check_same_size(depth_t.width(), depth_t.height(), visibility.width(),
                  visibility.height(), "dynamic_motion: dimension mismatch");
  MotionField3D out(depth_t.width(), depth_t.height(),
                    Eigen::Vector3d::Zero());
  for (int y = 0; y < depth_t.height(); ++y) {
    for (int x = 0; x < depth_t.width(); ++x) {
      const double w = visibility.at(x, y) * segment.at(x, y);
      if (w == 0.0) continue;
      Eigen::Vector3d delta;
      if (flow_endpoint_delta(depth_t, depth_s, flow, K, x, y, &delta))
        out.at(x, y) = w * delta;
    }
  }
  return out;
}

MotionField3D flow_background_motion(const DepthMap& depth_t,
                                     const DepthMap& depth_s,
                                     const FlowField2D& flow,
                                     const Mask& segment,
                                     const Mask& visibility,
                                     const Intrinsics& K) {
  check_same_size(depth_t.width(), depth_t.height(), flow.width(),
                  flow.height(),
                  "flow_background_motion: dimension mismatch");
  check_same_size(depth_t.width(), depth_t.height(), segment.width(),
                  segment.height(),
                  "flow_background_motion: dimension mismatch");
  check_same_size(depth_t.width(), depth_t.height(), visibility.width(),
                  visibility.height(),
                  "flow_background_motion: dimension mismatch");
  MotionField3D out(depth_t.width(), depth_t.height(),
                    Eigen::Vector3d::Zero());
  for (int y = 0; y < depth_t.height(); ++y) {
    for (int x = 0; x < depth_t.width(); ++x) {
      const double w = visibility.at(x, y) * (1.0 - segment.at(x, y));
      if (w == 0.0) continue;
      Eigen::Vector3d delta;
      if (flow_endpoint_delta(depth_t, depth_s, flow, K, x, y, &delta))
        out.at(x, y) = w * delta;
    }
  }
  return out;
}

HMPOutput parse(const DepthMap& depth_t, const DepthMap& depth_s,
                const FlowField2D& flow_fwd, const FlowField2D& flow_bwd,
                const PoseSE3& T, const Mask& segment, const Intrinsics& K,
                double alpha1, double alpha2) {
  HMPOutput out;
  out.visibility = visibility_mask(flow_fwd, flow_bwd, alpha1, alpha2);
  out.rigid = rigid_motion(depth_t, T, segment, out.visibility, K);
  out.dynamic =
      dynamic_motion(depth_t, depth_s, flow_fwd, segment, out.visibility, K);
  out.flow_background = flow_background_motion(depth_t, depth_s, flow_fwd,
                                               segment, out.visibility, K);
  return out;
}

}  // namespace evp
