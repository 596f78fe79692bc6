#include "evp/geometry.hpp"

#include <Eigen/LU>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace evp {

namespace {

Eigen::Matrix3d skew(const Eigen::Vector3d& v) {
  Eigen::Matrix3d s;
  s << 0, -v.z(), v.y(), v.z(), 0, -v.x(), -v.y(), v.x(), 0;
  return s;
}

}  // namespace

Intrinsics::Intrinsics(double fx_, double fy_, double cx_, double cy_,
                       int width_, int height_)
    : fx(fx_), fy(fy_), cx(cx_), cy(cy_), width(width_), height(height_) {
  if (!(fx > 0) || !(fy > 0))
    throw std::domain_error("Intrinsics: focal lengths must be positive");
  if (width < 1 || height < 1)
    throw std::domain_error("Intrinsics: image size must be positive");
}

Eigen::Matrix3d Intrinsics::matrix() const {
  Eigen::Matrix3d K;
  K << fx, 0, cx, 0, fy, cy, 0, 0, 1;
  return K;
}

Intrinsics Intrinsics::scaled(int factor) const {
  if (factor < 1) throw std::domain_error("Intrinsics::scaled: factor < 1");
  const double f = factor;
  // Top-left pixel-center convention: continuous coord u maps to (u+0.5)/f-0.5.
  return Intrinsics(fx / f, fy / f, (cx + 0.5) / f - 0.5, (cy + 0.5) / f - 0.5,
                    width / factor, height / factor);
}

PoseSE3::PoseSE3()
    : rotation_(Eigen::Matrix3d::Identity()), translation_(Eigen::Vector3d::Zero()) {}

PoseSE3::PoseSE3(const Eigen::Matrix3d& rotation,
                 const Eigen::Vector3d& translation)
    : rotation_(rotation), translation_(translation) {
  const double ortho =
      (rotation.transpose() * rotation - Eigen::Matrix3d::Identity()).norm();
  if (ortho > 1e-9)
    throw std::domain_error("PoseSE3: rotation is not orthonormal");
  if (std::abs(rotation.determinant() - 1.0) > 1e-9)
    throw std::domain_error("PoseSE3: rotation determinant is not +1");
}

PoseSE3 PoseSE3::inverse() const {
  Eigen::Matrix3d Rt = rotation_.transpose();
  return PoseSE3(Rt, -(Rt * translation_));
}

PoseSE3 PoseSE3::compose(const PoseSE3& other) const {
  return PoseSE3(rotation_ * other.rotation_,
                 rotation_ * other.translation_ + translation_);
}

Point3 backproject(const Pixel& p, double depth, const Intrinsics& K) {
  if (!(depth > 0)) throw std::domain_error("backproject: depth must be > 0");
  return {depth * (p.x() - K.cx) / K.fx, depth * (p.y() - K.cy) / K.fy, depth};
}

Pixel project(const Point3& X, const Intrinsics& K) {
  if (!(X.z() > 0)) throw std::domain_error("project: point behind camera");
  return {K.fx * X.x() / X.z() + K.cx, K.fy * X.y() / X.z() + K.cy};
}

Point3 transform(const PoseSE3& T, const Point3& X) {
  return T.rotation() * X + T.translation();
}

Pixel project_with_motion(const Pixel& p, double depth, const PoseSE3& T,
                          const Eigen::Vector3d& motion, const Intrinsics& K) {
  const Point3 X = transform(T, backproject(p, depth, K)) + motion;
  return project(X, K);
}

PoseSE3 se3_exp(const Twist& xi) {
  const Eigen::Vector3d v = xi.head<3>();
  const Eigen::Vector3d w = xi.tail<3>();
  const double theta = w.norm();
  const Eigen::Matrix3d W = skew(w);

  Eigen::Matrix3d R, V;
  if (theta < 1e-10) {
    R = Eigen::Matrix3d::Identity() + W + 0.5 * W * W;
    V = Eigen::Matrix3d::Identity() + 0.5 * W + W * W / 6.0;
  } else {
    const double t2 = theta * theta;
    const double a = std::sin(theta) / theta;
    const double b = (1.0 - std::cos(theta)) / t2;
    const double c = (1.0 - a) / t2;
    R = Eigen::Matrix3d::Identity() + a * W + b * W * W;
    V = Eigen::Matrix3d::Identity() + b * W + c * W * W;
  }
  // Re-orthonormalize against rounding so the PoseSE3 invariant holds.
  Eigen::JacobiSVD<Eigen::Matrix3d> svd(
      R, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Eigen::Matrix3d Ro = svd.matrixU() * svd.matrixV().transpose();
  if (Ro.determinant() < 0) {
    Eigen::Matrix3d U = svd.matrixU();
    U.col(2) *= -1.0;
    Ro = U * svd.matrixV().transpose();
  }
  return PoseSE3(Ro, V * v);
}

Twist se3_log(const PoseSE3& T) {
  const Eigen::Matrix3d& R = T.rotation();
  const double cos_theta =
      std::clamp((R.trace() - 1.0) / 2.0, -1.0, 1.0);
  const double theta = std::acos(cos_theta);
  if (theta > M_PI - 1e-6)
    throw std::domain_error("se3_log: rotation angle too close to pi");

  Eigen::Vector3d w;
  Eigen::Matrix3d W;
  if (theta < 1e-10) {
    W = 0.5 * (R - R.transpose());
    w = {W(2, 1), W(0, 2), W(1, 0)};
  } else {
    W = theta / (2.0 * std::sin(theta)) * (R - R.transpose());
    w = {W(2, 1), W(0, 2), W(1, 0)};
  }

  Eigen::Matrix3d Vinv;
  if (theta < 1e-10) {
    Vinv = Eigen::Matrix3d::Identity() - 0.5 * W + W * W / 12.0;
  } else {
    const double half = theta / 2.0;
    const double cot = std::cos(half) / std::sin(half);
    Vinv = Eigen::Matrix3d::Identity() - 0.5 * W +
           (1.0 - half * cot) / (theta * theta) * W * W;
  }

  Twist xi;
  xi.head<3>() = Vinv * T.translation();
  xi.tail<3>() = w;
  return xi;
}

FlowField2D rigid_flow_2d(const DepthMap& depth, const PoseSE3& T,
                          const Intrinsics& K) {
  FlowField2D flow(depth.width(), depth.height());
  for (int y = 0; y < depth.height(); ++y) {
    for (int x = 0; x < depth.width(); ++x) {
      const double d = depth.at(x, y);
      if (!(d > 0))
        throw std::domain_error("rigid_flow_2d: non-positive depth");
      const Pixel p(x, y);
      const Point3 X = transform(T, backproject(p, d, K));
      if (X.z() <= kMinDepth) {
        flow.valid.at(x, y) = 0;
        flow.vec.at(x, y).setZero();
        continue;
      }
      flow.vec.at(x, y) = project(X, K) - p;
      flow.valid.at(x, y) = 1;
    }
  }
  return flow;
}

}  // namespace evp
