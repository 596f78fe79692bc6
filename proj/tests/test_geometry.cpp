#include <doctest.h>

#include <Eigen/Geometry>
#include <random>

#include "evp/geometry.hpp"

using namespace evp;

TEST_CASE("backproject hand value") {
  const Intrinsics K(200, 200, 96, 48, 192, 96);
  const Point3 X = backproject({100, 50}, 2.0, K);
  CHECK(X.x() == doctest::Approx(0.04).epsilon(1e-12));
  CHECK(X.y() == doctest::Approx(0.02).epsilon(1e-12));
  CHECK(X.z() == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("project hand value") {
  const Intrinsics K(200, 200, 96, 48, 192, 96);
  const Pixel p = project({0.04, 0.02, 2.0}, K);
  CHECK(p.x() == doctest::Approx(100).epsilon(1e-12));
  CHECK(p.y() == doctest::Approx(50).epsilon(1e-12));
}

TEST_CASE("project/backproject round trip") {
  const Intrinsics K(180, 220, 60.5, 40.5, 128, 80);
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> ux(0, 127), uy(0, 79), ud(0.3, 50);
  double max_err = 0;
  for (int i = 0; i < 100000; ++i) {
    const Pixel p(ux(rng), uy(rng));
    const double d = ud(rng);
    const Pixel q = project(backproject(p, d, K), K);
    max_err = std::max(max_err, (q - p).cwiseAbs().maxCoeff());
  }
  CHECK(max_err < 1e-9);
}

TEST_CASE("backproject rejects non-positive depth") {
  const Intrinsics K(100, 100, 10, 10, 32, 32);
  CHECK_THROWS_AS(backproject({0, 0}, 0.0, K), std::domain_error);
  CHECK_THROWS_AS(project({0, 0, 0}, K), std::domain_error);
}

TEST_CASE("transform identity and composition") {
  CHECK(transform(PoseSE3(), Point3(1, 2, 3)).isApprox(Point3(1, 2, 3)));

  std::mt19937_64 rng(11);
  std::normal_distribution<double> n(0, 1);
  for (int i = 0; i < 50; ++i) {
    Twist xi1, xi2;
    for (int k = 0; k < 6; ++k) {
      xi1[k] = 0.5 * n(rng);
      xi2[k] = 0.5 * n(rng);
    }
    const PoseSE3 T1 = se3_exp(xi1), T2 = se3_exp(xi2);
    const Point3 X(n(rng), n(rng), n(rng));
    const Point3 a = transform(T2, transform(T1, X));
    const Point3 b = transform(T2.compose(T1), X);
    CHECK((a - b).norm() < 1e-12);

    // Independent 4x4 homogeneous matrix-product oracle.
    Eigen::Matrix4d M1 = Eigen::Matrix4d::Identity(),
                    M2 = Eigen::Matrix4d::Identity();
    M1.topLeftCorner<3, 3>() = T1.rotation();
    M1.topRightCorner<3, 1>() = T1.translation();
    M2.topLeftCorner<3, 3>() = T2.rotation();
    M2.topRightCorner<3, 1>() = T2.translation();
    const Eigen::Vector4d h = (M2 * M1) * Eigen::Vector4d(X.x(), X.y(), X.z(), 1);
    CHECK((a - h.head<3>()).norm() < 1e-12);
  }
}

TEST_CASE("PoseSE3 rejects non-orthonormal rotation") {
  Eigen::Matrix3d R = Eigen::Matrix3d::Identity();
  R(0, 0) = 1.5;
  CHECK_THROWS_AS(PoseSE3(R, Eigen::Vector3d::Zero()), std::domain_error);
}

TEST_CASE("project_with_motion hand values") {
  const Intrinsics K(200, 200, 96, 48, 192, 96);
  // Identity pose, no motion: source pixel equals target pixel.
  const Pixel p0 = project_with_motion({30, 40}, 3.0, PoseSE3(),
                                       Eigen::Vector3d::Zero(), K);
  CHECK((p0 - Pixel(30, 40)).norm() < 1e-12);

  // 1 cm lateral motion at the principal point, depth 1, fx = 200 -> 2 px.
  const Pixel p1 = project_with_motion({96, 48}, 1.0, PoseSE3(),
                                       {0.01, 0, 0}, K);
  CHECK(p1.x() == doctest::Approx(98.0).epsilon(1e-12));
  CHECK(p1.y() == doctest::Approx(48.0).epsilon(1e-12));
}

TEST_CASE("se3 exp/log round trip") {
  CHECK(se3_exp(Twist::Zero()).rotation().isIdentity(1e-15));
  CHECK(se3_exp(Twist::Zero()).translation().norm() == 0.0);

  std::mt19937_64 rng(3);
  std::normal_distribution<double> n(0, 1);
  double max_err = 0;
  for (int i = 0; i < 10000; ++i) {
    Twist xi;
    for (int k = 0; k < 6; ++k) xi[k] = n(rng);
    if (xi.tail<3>().norm() >= 3.0) xi.tail<3>() *= 2.9 / xi.tail<3>().norm();
    const Twist back = se3_log(se3_exp(xi));
    max_err = std::max(max_err, (back - xi).cwiseAbs().maxCoeff());
  }
  CHECK(max_err < 1e-10);
}

TEST_CASE("se3_exp matches quaternion (angle-axis) oracle") {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> n(0, 1);
  for (int i = 0; i < 100; ++i) {
    Twist xi = Twist::Zero();
    Eigen::Vector3d w(n(rng), n(rng), n(rng));
    xi.tail<3>() = w;
    const Eigen::Matrix3d R_oracle =
        w.norm() < 1e-12
            ? Eigen::Matrix3d::Identity()
            : Eigen::AngleAxisd(w.norm(), w.normalized()).toRotationMatrix();
    CHECK((se3_exp(xi).rotation() - R_oracle).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("rigid_flow_2d plane oracle") {
  const Intrinsics K(120, 120, 15.5, 11.5, 32, 24);
  const DepthMap depth(32, 24, 4.0);

  SUBCASE("identity pose gives zero flow") {
    const FlowField2D f = rigid_flow_2d(depth, PoseSE3(), K);
    for (int y = 0; y < 24; ++y)
      for (int x = 0; x < 32; ++x) {
        CHECK(f.valid.at(x, y) == 1);
        CHECK(f.vec.at(x, y).norm() < 1e-12);
      }
  }

  SUBCASE("lateral camera translation gives uniform flow -fx*b/d") {
    const double b = 0.2;
    const PoseSE3 T(Eigen::Matrix3d::Identity(), Eigen::Vector3d(b, 0, 0));
    const FlowField2D f = rigid_flow_2d(depth, T, K);
    for (int y = 0; y < 24; ++y)
      for (int x = 0; x < 32; ++x) {
        CHECK(f.vec.at(x, y).x() == doctest::Approx(120 * b / 4.0).epsilon(1e-12));
        CHECK(std::abs(f.vec.at(x, y).y()) < 1e-12);
      }
  }

  SUBCASE("z-translation: zero flow at the principal point") {
    const PoseSE3 T(Eigen::Matrix3d::Identity(), Eigen::Vector3d(0, 0, 0.5));
    const FlowField2D f = rigid_flow_2d(depth, T, K);
    // Principal point (15.5, 11.5) sits between pixels; interpolate the
    // analytic flow at the four neighbors instead: it must be radial, so the
    // x-flow changes sign across cx.
    CHECK(f.vec.at(15, 11).x() > 0);  // point pushed away: flow contracts
    CHECK(f.vec.at(16, 11).x() < 0);
    CHECK(std::abs(f.vec.at(15, 11).x() + f.vec.at(16, 11).x()) < 1e-12);
  }
}

TEST_CASE("intrinsics scaling uses pixel-center convention") {
  const Intrinsics K(100, 100, 47.5, 31.5, 96, 64);
  const Intrinsics K2 = K.scaled(2);
  CHECK(K2.width == 48);
  CHECK(K2.height == 32);
  CHECK(K2.fx == doctest::Approx(50.0));
  // Center of the full-resolution image stays the center at half resolution.
  CHECK(K2.cx == doctest::Approx((47.5 + 0.5) / 2 - 0.5));
  CHECK(K2.cy == doctest::Approx((31.5 + 0.5) / 2 - 0.5));
}
