// Pinhole camera model, SE(3) algebra and the projection primitives used by
// every other module.

#ifndef EVP_GEOMETRY_HPP
#define EVP_GEOMETRY_HPP

#include <Eigen/Core>

#include "evp/grids.hpp"

namespace evp {

using Pixel = Eigen::Vector2d;   // (u = column, v = row), top-left pixel center
using Point3 = Eigen::Vector3d;  // camera-frame meters
using Twist = Eigen::Matrix<double, 6, 1>;  // (v, omega)

/// Pinhole intrinsics. fx, fy > 0 so K is always invertible.
struct Intrinsics {
  double fx = 0, fy = 0, cx = 0, cy = 0;
  int width = 0, height = 0;

  Intrinsics() = default;
  Intrinsics(double fx, double fy, double cx, double cy, int width, int height);

  Eigen::Matrix3d matrix() const;

  /// Intrinsics for a pyramid level downscaled by `factor` (integer >= 1).
  Intrinsics scaled(int factor) const;
};

/// Rigid transform [R|t]. Orthonormality of R is checked on construction.
class PoseSE3 {
 public:
  PoseSE3();  // identity
  PoseSE3(const Eigen::Matrix3d& rotation, const Eigen::Vector3d& translation);

  const Eigen::Matrix3d& rotation() const { return rotation_; }
  const Eigen::Vector3d& translation() const { return translation_; }

  PoseSE3 inverse() const;
  /// Composition: (*this) after other, i.e. T_this * T_other.
  PoseSE3 compose(const PoseSE3& other) const;

 private:
  Eigen::Matrix3d rotation_;
  Eigen::Vector3d translation_;
};

/// phi(p|D) = d * K^-1 * h(p). Requires d > 0.
Point3 backproject(const Pixel& p, double depth, const Intrinsics& K);

/// Perspective projection (fx*x/z + cx, fy*y/z + cy). Requires X.z > 0.
Pixel project(const Point3& X, const Intrinsics& K);

/// R * X + t.
Point3 transform(const PoseSE3& T, const Point3& X);

/// Projects a pixel into the source view with an additive 3D object motion:
/// X' = T * phi(p|D) + motion, result = project(X'). The source-depth
/// denominator of the projection is realized as perspective division by X'.z.
Pixel project_with_motion(const Pixel& p, double depth, const PoseSE3& T,
                          const Eigen::Vector3d& motion, const Intrinsics& K);

/// Exponential map se(3) -> SE(3) (Rodrigues).
PoseSE3 se3_exp(const Twist& xi);

/// Logarithm map SE(3) -> se(3); requires rotation angle < pi.
Twist se3_log(const PoseSE3& T);

/// Points with transformed z below this are flagged invalid in batch ops.
inline constexpr double kMinDepth = 1e-6;

/// 2D displacement field p_s - p_t induced by camera motion T over depth D_t
/// (no object motion). Pixels mapping behind the camera are flagged invalid.
FlowField2D rigid_flow_2d(const DepthMap& depth, const PoseSE3& T,
                          const Intrinsics& K);

}  // namespace evp

#endif  // EVP_GEOMETRY_HPP
