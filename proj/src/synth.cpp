#include "evp/synth.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

#include "evp/config_io.hpp"

namespace evp {

namespace {

/// Band-limited value-noise texture: a fixed sum of random-direction cosine
/// waves. Smooth everywhere, so bilinear resampling and photometric
/// gradients stay well conditioned.
class WaveTexture {
 public:
  explicit WaveTexture(uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> freq(0.25, 1.4);   // cycles per m
    std::uniform_real_distribution<double> angle(0, 2 * M_PI);
    for (int k = 0; k < kWaves; ++k) {
      const double f = freq(rng);
      const double a = angle(rng);
      fx_[k] = 2 * M_PI * f * std::cos(a);
      fy_[k] = 2 * M_PI * f * std::sin(a);
      phase_[k] = angle(rng);
    }
  }

  double operator()(double x, double y) const {
    double v = 0;
    for (int k = 0; k < kWaves; ++k)
      v += std::cos(fx_[k] * x + fy_[k] * y + phase_[k]);
    return 0.5 + 0.4 * v / kWaves;  // range within [0.1, 0.9]
  }

 private:
  static constexpr int kWaves = 8;
  double fx_[kWaves], fy_[kWaves], phase_[kWaves];
};

struct Hit {
  double depth = 0;  // camera-frame z of the intersection
  Point3 point_w = Point3::Zero();
  bool box = false;
};

class SceneRenderer {
 public:
  explicit SceneRenderer(const SceneSpec& spec)
      : spec_(spec),
        K_(spec.intrinsics()),
        tex_bg_(spec.texture_seed),
        tex_box_(spec.texture_seed + 1) {}

  const Intrinsics& intrinsics() const { return K_; }

  /// Camera pose (world -> camera) of frame i.
  PoseSE3 camera_pose(int frame) const {
    PoseSE3 pose;
    const PoseSE3 step = se3_exp(spec_.cam_twist);
    for (int i = 0; i < frame; ++i) pose = step.compose(pose);
    return pose;
  }

  /// Casts the ray of continuous pixel p in the given camera against the
  /// scene state of frame `frame`. Returns false when nothing is hit in
  /// front of the camera.
  bool raycast(const PoseSE3& cam, const Pixel& p, int frame,
               Hit* hit) const {
    const PoseSE3 inv = cam.inverse();
    const Point3 origin = inv.translation();
    // Direction scaled so that camera depth equals the ray parameter.
    const Point3 dir = inv.rotation() * Point3((p.x() - K_.cx) / K_.fx,
                                               (p.y() - K_.cy) / K_.fy, 1.0);

    bool found = false;
    if (spec_.has_box) {
      const Eigen::Vector3d off = double(frame) * spec_.box.velocity;
      const double zb = spec_.box.depth + off.z();
      if (std::abs(dir.z()) > 1e-12) {
        const double lam = (zb - origin.z()) / dir.z();
        if (lam > kMinDepth) {
          const Point3 X = origin + lam * dir;
          if (X.x() >= spec_.box.x0 + off.x() &&
              X.x() <= spec_.box.x0 + spec_.box.size_x + off.x() &&
              X.y() >= spec_.box.y0 + off.y() &&
              X.y() <= spec_.box.y0 + spec_.box.size_y + off.y()) {
            hit->depth = lam;
            hit->point_w = X;
            hit->box = true;
            found = true;
          }
        }
      }
    }
    if (std::abs(dir.z()) > 1e-12) {
      const double lam = (spec_.bg_depth - origin.z()) / dir.z();
      if (lam > kMinDepth && (!found || lam < hit->depth)) {
        hit->depth = lam;
        hit->point_w = origin + lam * dir;
        hit->box = false;
        found = true;
      }
    }
    return found;
  }

  double shade(const Hit& hit, int frame) const {
    if (hit.box) {
      const Eigen::Vector3d off = double(frame) * spec_.box.velocity;
      return tex_box_(hit.point_w.x() - off.x(), hit.point_w.y() - off.y());
    }
    return tex_bg_(hit.point_w.x(), hit.point_w.y());
  }

 private:
  const SceneSpec& spec_;
  Intrinsics K_;
  WaveTexture tex_bg_, tex_box_;
};

}  // namespace

Intrinsics SceneSpec::intrinsics() const {
  return Intrinsics(fx, fy, cx, cy, width, height);
}

void SceneSpec::validate() const {
  intrinsics();  // checks fx, fy, size
  if (!(bg_depth > 0)) throw std::domain_error("SceneSpec: bg_depth <= 0");
  if (baseline < 0) throw std::domain_error("SceneSpec: negative baseline");
  if (n_frames < 2) throw std::domain_error("SceneSpec: need >= 2 frames");
  if (has_box && !(box.depth > 0))
    throw std::domain_error("SceneSpec: box depth <= 0");
}

std::vector<FrameBundle> synthesize_scene(const SceneSpec& spec) {
  spec.validate();
  const SceneRenderer scene(spec);
  const Intrinsics K = scene.intrinsics();
  const int W = K.width, H = K.height;

  // Frustum check: the box must stay at least partly visible in every frame.
  if (spec.has_box) {
    for (int f = 0; f < spec.n_frames; ++f) {
      const PoseSE3 cam = scene.camera_pose(f);
      const Eigen::Vector3d off = double(f) * spec.box.velocity;
      double umin = 1e30, umax = -1e30, vmin = 1e30, vmax = -1e30;
      for (int cxi = 0; cxi < 2; ++cxi) {
        for (int cyi = 0; cyi < 2; ++cyi) {
          const Point3 corner_w(spec.box.x0 + cxi * spec.box.size_x + off.x(),
                                spec.box.y0 + cyi * spec.box.size_y + off.y(),
                                spec.box.depth + off.z());
          const Point3 Xc = transform(cam, corner_w);
          if (!(Xc.z() > 1e-3))
            throw std::domain_error("SceneSpec: box behind camera");
          const Pixel q = project(Xc, K);
          umin = std::min(umin, q.x());
          umax = std::max(umax, q.x());
          vmin = std::min(vmin, q.y());
          vmax = std::max(vmax, q.y());
        }
      }
      if (umax < 0 || umin > W - 1 || vmax < 0 || vmin > H - 1)
        throw std::domain_error("SceneSpec: box outside frustum");
    }
  }

  std::vector<FrameBundle> bundles;
  for (int f = 0; f + 1 < spec.n_frames; ++f) {
    const PoseSE3 cam_t = scene.camera_pose(f);
    const PoseSE3 cam_s = scene.camera_pose(f + 1);
    FrameBundle b;
    b.K = K;
    b.T_ts = cam_s.compose(cam_t.inverse());
    b.T_tc = PoseSE3(Eigen::Matrix3d::Identity(),
                     Eigen::Vector3d(-spec.baseline, 0, 0));
    b.has_stereo = spec.baseline > 0;

    b.img_t = ImageBuf(W, H, 1);
    b.img_s = ImageBuf(W, H, 1);
    b.depth_t = DepthMap(W, H, spec.bg_depth);
    b.depth_s = DepthMap(W, H, spec.bg_depth);
    b.flow_fwd = FlowField2D(W, H);
    b.flow_bwd = FlowField2D(W, H);
    b.segment = Mask(W, H, 0.0);
    b.visibility = Mask(W, H, 0.0);
    if (b.has_stereo) {
      b.img_c = ImageBuf(W, H, 1);
      b.depth_c = DepthMap(W, H, spec.bg_depth);
    }
    const PoseSE3 cam_c = b.T_tc.compose(cam_t);

    for (int y = 0; y < H; ++y) {
      for (int x = 0; x < W; ++x) {
        const Pixel p(x, y);

        Hit ht;
        if (!scene.raycast(cam_t, p, f, &ht))
          throw std::domain_error("synthesize_scene: ray misses scene");
        b.depth_t.at(x, y) = ht.depth;
        b.img_t.at(x, y, 0) = scene.shade(ht, f);
        b.segment.at(x, y) = ht.box ? 1.0 : 0.0;

        Hit hs;
        if (!scene.raycast(cam_s, p, f + 1, &hs))
          throw std::domain_error("synthesize_scene: ray misses scene");
        b.depth_s.at(x, y) = hs.depth;
        b.img_s.at(x, y, 0) = scene.shade(hs, f + 1);

        if (b.has_stereo) {
          Hit hc;
          if (!scene.raycast(cam_c, p, f, &hc))
            throw std::domain_error("synthesize_scene: ray misses scene");
          b.depth_c.at(x, y) = hc.depth;
          b.img_c.at(x, y, 0) = scene.shade(hc, f);
        }

        // Forward flow: where the target pixel's surface point lands in the
        // source frame (defined also for occluded pixels).
        const Point3 fwd_w =
            ht.point_w + (ht.box ? spec.box.velocity : Eigen::Vector3d::Zero());
        const Point3 fwd_c = transform(cam_s, fwd_w);
        if (fwd_c.z() > kMinDepth) {
          const Pixel q = project(fwd_c, K);
          b.flow_fwd.vec.at(x, y) = q - p;

          // Visibility: inside the source image and not occluded there.
          if (q.x() >= 0 && q.x() <= W - 1 && q.y() >= 0 && q.y() <= H - 1) {
            Hit hq;
            const bool hit_any = scene.raycast(cam_s, q, f + 1, &hq);
            if (hit_any && hq.depth >= fwd_c.z() - 1e-6)
              b.visibility.at(x, y) = 1.0;
          }
        } else {
          b.flow_fwd.valid.at(x, y) = 0;
        }

        // Backward flow from the source frame's surfaces.
        const Point3 bwd_w =
            hs.point_w - (hs.box ? spec.box.velocity : Eigen::Vector3d::Zero());
        const Point3 bwd_c = transform(cam_t, bwd_w);
        if (bwd_c.z() > kMinDepth) {
          b.flow_bwd.vec.at(x, y) = project(bwd_c, K) - p;
        } else {
          b.flow_bwd.valid.at(x, y) = 0;
        }
      }
    }
    bundles.push_back(std::move(b));
  }
  return bundles;
}

SceneSpec read_scene_spec(const std::string& path) {
  const KeyValueFile kv = KeyValueFile::load(path);
  SceneSpec s;
  s.width = kv.get_int("width", s.width);
  s.height = kv.get_int("height", s.height);
  s.fx = kv.get_double("fx", s.fx);
  s.fy = kv.get_double("fy", s.fy);
  s.cx = kv.get_double("cx", (s.width - 1) / 2.0);
  s.cy = kv.get_double("cy", (s.height - 1) / 2.0);
  s.bg_depth = kv.get_double("bg_depth", s.bg_depth);
  s.texture_seed = static_cast<uint64_t>(kv.get_double("seed", 1));
  s.baseline = kv.get_double("baseline", 0.0);
  s.n_frames = kv.get_int("n_frames", 2);
  for (int i = 0; i < 6; ++i)
    s.cam_twist[i] =
        kv.get_double("cam_twist_" + std::to_string(i), 0.0);
  s.has_box = kv.get_int("has_box", 0) != 0;
  if (s.has_box) {
    s.box.x0 = kv.get_double("box_x0");
    s.box.y0 = kv.get_double("box_y0");
    s.box.size_x = kv.get_double("box_size_x");
    s.box.size_y = kv.get_double("box_size_y");
    s.box.depth = kv.get_double("box_depth");
    s.box.velocity = {kv.get_double("box_vel_x", 0.0),
                      kv.get_double("box_vel_y", 0.0),
                      kv.get_double("box_vel_z", 0.0)};
  }
  s.validate();
  return s;
}

void write_scene_spec(const std::string& path, const SceneSpec& spec) {
  KeyValueFile kv;
  kv.set("width", static_cast<double>(spec.width));
  kv.set("height", static_cast<double>(spec.height));
  kv.set("fx", spec.fx);
  kv.set("fy", spec.fy);
  kv.set("cx", spec.cx);
  kv.set("cy", spec.cy);
  kv.set("bg_depth", spec.bg_depth);
  kv.set("seed", static_cast<double>(spec.texture_seed));
  kv.set("baseline", spec.baseline);
  kv.set("n_frames", static_cast<double>(spec.n_frames));
  for (int i = 0; i < 6; ++i)
    kv.set("cam_twist_" + std::to_string(i), spec.cam_twist[i]);
  kv.set("has_box", spec.has_box ? 1.0 : 0.0);
  if (spec.has_box) {
    kv.set("box_x0", spec.box.x0);
    kv.set("box_y0", spec.box.y0);
    kv.set("box_size_x", spec.box.size_x);
    kv.set("box_size_y", spec.box.size_y);
    kv.set("box_depth", spec.box.depth);
    kv.set("box_vel_x", spec.box.velocity.x());
    kv.set("box_vel_y", spec.box.velocity.y());
    kv.set("box_vel_z", spec.box.velocity.z());
  }
  kv.save(path);
}

}  // namespace evp
