#include <doctest.h>

#include <filesystem>

#include "evp/synth.hpp"
#include "test_util.hpp"

using namespace evp;

TEST_CASE("static scene: zero flow, box mask, full visibility") {
  SceneSpec spec = test::moving_box_scene(4, {0, 0, 0});
  const auto bundles = synthesize_scene(spec);
  REQUIRE(bundles.size() == 1);
  const FrameBundle& b = bundles.front();

  long box_pixels = 0;
  for (int y = 0; y < spec.height; ++y)
    for (int x = 0; x < spec.width; ++x) {
      CHECK(b.flow_fwd.vec.at(x, y).norm() < 1e-12);
      CHECK(b.flow_bwd.vec.at(x, y).norm() < 1e-12);
      CHECK(b.visibility.at(x, y) == 1.0);
      if (b.segment.at(x, y) > 0.5) {
        ++box_pixels;
        CHECK(b.depth_t.at(x, y) == doctest::Approx(4.0));
      } else {
        CHECK(b.depth_t.at(x, y) == doctest::Approx(6.0));
      }
    }
  // The box spans roughly (size / depth * f)^2 pixels.
  CHECK(box_pixels > 300);
}

TEST_CASE("camera z-translation: zero flow at the principal point") {
  SceneSpec spec;
  spec.texture_seed = 2;
  spec.width = 33;  // odd so the principal point is a pixel center
  spec.height = 25;
  spec.cx = 16.0;
  spec.cy = 12.0;
  spec.cam_twist[2] = 0.05;
  const auto bundles = synthesize_scene(spec);
  const FrameBundle& b = bundles.front();
  CHECK(b.flow_fwd.vec.at(16, 12).norm() < 1e-12);
  // Positive z-step pushes scene points away, so off-center flow contracts
  // toward the principal point.
  CHECK(b.flow_fwd.vec.at(30, 12).x() < 0);
  CHECK(b.flow_fwd.vec.at(2, 12).x() > 0);
}

TEST_CASE("box flow magnitude: fx * dx / z") {
  // Lateral box velocity 0.1 m at depth 5 with fx = 200 -> 4 px flow.
  SceneSpec spec;
  spec.texture_seed = 3;
  spec.fx = spec.fy = 200;
  spec.width = 128;
  spec.height = 96;
  spec.cx = 63.5;
  spec.cy = 47.5;
  spec.bg_depth = 10.0;
  spec.has_box = true;
  spec.box.x0 = -0.8;
  spec.box.y0 = -0.6;
  spec.box.size_x = 1.6;
  spec.box.size_y = 1.2;
  spec.box.depth = 5.0;
  spec.box.velocity = {0.1, 0, 0};
  const auto bundles = synthesize_scene(spec);
  const FrameBundle& b = bundles.front();
  for (int y = 0; y < spec.height; ++y)
    for (int x = 0; x < spec.width; ++x)
      if (b.segment.at(x, y) > 0.5) {
        CHECK(b.flow_fwd.vec.at(x, y).x() ==
              doctest::Approx(4.0).epsilon(1e-9));
        CHECK(std::abs(b.flow_fwd.vec.at(x, y).y()) < 1e-9);
      }
}

TEST_CASE("stereo bundle uses the fixed rectified baseline") {
  SceneSpec spec = test::rigid_scene(5, {0.02, 0, 0});
  spec.baseline = 0.25;
  const auto bundles = synthesize_scene(spec);
  const FrameBundle& b = bundles.front();
  REQUIRE(b.has_stereo);
  CHECK(b.T_tc.rotation().isIdentity(1e-14));
  CHECK(b.T_tc.translation().x() == doctest::Approx(-0.25));
  // Fronto-parallel plane: stereo depth equals the target depth.
  for (int y = 0; y < spec.height; ++y)
    for (int x = 0; x < spec.width; ++x)
      CHECK(b.depth_c.at(x, y) == doctest::Approx(b.depth_t.at(x, y)));
}

TEST_CASE("multi-frame scenes emit consecutive pairs with consistent poses") {
  SceneSpec spec = test::rigid_scene(6, {0.03, 0, 0.01});
  spec.n_frames = 4;
  const auto bundles = synthesize_scene(spec);
  REQUIRE(bundles.size() == 3);
  const PoseSE3 step = se3_exp(spec.cam_twist);
  for (const FrameBundle& b : bundles) {
    CHECK((b.T_ts.rotation() - step.rotation()).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((b.T_ts.translation() - step.translation()).norm() < 1e-12);
  }
}

TEST_CASE("invalid specs are rejected") {
  SceneSpec spec;
  spec.bg_depth = -1;
  CHECK_THROWS_AS(synthesize_scene(spec), std::domain_error);

  spec = SceneSpec{};
  spec.has_box = true;
  spec.box.x0 = 100;  // far outside the frustum
  spec.box.y0 = 100;
  spec.box.depth = 4;
  CHECK_THROWS_AS(synthesize_scene(spec), std::domain_error);
}

TEST_CASE("scene spec file round trip") {
  namespace fs = std::filesystem;
  SceneSpec spec = test::moving_box_scene(77, {0.1, -0.05, 0.02});
  spec.cam_twist << 0.01, 0.02, 0.03, 0.001, 0.002, 0.003;
  spec.baseline = 0.5;
  const std::string path =
      (fs::temp_directory_path() / "evp_scene_spec.txt").string();
  write_scene_spec(path, spec);
  const SceneSpec back = read_scene_spec(path);
  CHECK(back.width == spec.width);
  CHECK(back.height == spec.height);
  CHECK(back.fx == spec.fx);
  CHECK(back.bg_depth == spec.bg_depth);
  CHECK(back.texture_seed == spec.texture_seed);
  CHECK(back.has_box == spec.has_box);
  CHECK(back.box.x0 == spec.box.x0);
  CHECK((back.box.velocity - spec.box.velocity).norm() == 0.0);
  CHECK((back.cam_twist - spec.cam_twist).norm() == 0.0);
  CHECK(back.baseline == spec.baseline);
}
