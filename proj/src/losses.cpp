#include "evp/losses.hpp"

#include <Eigen/Geometry>
#include <cmath>
#include <stdexcept>

#include "evp/hmp.hpp"

namespace evp {

namespace {

constexpr double kSsimC1 = 0.01 * 0.01;
constexpr double kSsimC2 = 0.03 * 0.03;
constexpr int kSsimRadius = 1;  // 3x3 window
constexpr double kCharbEps = 1e-3;

double charbonnier(double x) { return std::sqrt(x * x + kCharbEps * kCharbEps); }
double charbonnier_deriv(double x) { return x / charbonnier(x); }

struct BilinearTap {
  bool valid = false;
  int x0 = 0, y0 = 0, x1 = 0, y1 = 0;
  double fx = 0, fy = 0;
};

BilinearTap make_tap(int width, int height, double u, double v) {
  BilinearTap t;
  if (!(u >= 0.0) || !(v >= 0.0) || !(u <= width - 1) || !(v <= height - 1))
    return t;
  t.x0 = static_cast<int>(std::floor(u));
  t.y0 = static_cast<int>(std::floor(v));
  if (t.x0 > width - 2) t.x0 = std::max(width - 2, 0);
  if (t.y0 > height - 2) t.y0 = std::max(height - 2, 0);
  t.x1 = std::min(t.x0 + 1, width - 1);
  t.y1 = std::min(t.y0 + 1, height - 1);
  t.fx = u - t.x0;
  t.fy = v - t.y0;
  t.valid = true;
  return t;
}

double tap_value(const ImageBuf& img, const BilinearTap& t, int c) {
  return (1 - t.fx) * (1 - t.fy) * img.at(t.x0, t.y0, c) +
         t.fx * (1 - t.fy) * img.at(t.x1, t.y0, c) +
         (1 - t.fx) * t.fy * img.at(t.x0, t.y1, c) +
         t.fx * t.fy * img.at(t.x1, t.y1, c);
}

/// Spatial derivative of the bilinear interpolant at the tap.
Eigen::Vector2d tap_deriv(const ImageBuf& img, const BilinearTap& t, int c) {
  const double c00 = img.at(t.x0, t.y0, c);
  const double c10 = img.at(t.x1, t.y0, c);
  const double c01 = img.at(t.x0, t.y1, c);
  const double c11 = img.at(t.x1, t.y1, c);
  return {(1 - t.fy) * (c10 - c00) + t.fy * (c11 - c01),
          (1 - t.fx) * (c01 - c00) + t.fx * (c11 - c10)};
}

struct WindowStats {
  double mu_x = 0, mu_y = 0, sxx = 0, syy = 0, sxy = 0;
  int n = 0;
};

WindowStats window_stats(const ImageBuf& a, const ImageBuf& b, int cx, int cy,
                         int c) {
  WindowStats s;
  double sum_x = 0, sum_y = 0, sum_xx = 0, sum_yy = 0, sum_xy = 0;
  for (int dy = -kSsimRadius; dy <= kSsimRadius; ++dy) {
    for (int dx = -kSsimRadius; dx <= kSsimRadius; ++dx) {
      const int x = cx + dx, y = cy + dy;
      if (x < 0 || x >= a.width() || y < 0 || y >= a.height()) continue;
      const double xv = a.at(x, y, c);
      const double yv = b.at(x, y, c);
      sum_x += xv;
      sum_y += yv;
      sum_xx += xv * xv;
      sum_yy += yv * yv;
      sum_xy += xv * yv;
      ++s.n;
    }
  }
  s.mu_x = sum_x / s.n;
  s.mu_y = sum_y / s.n;
  s.sxx = sum_xx / s.n - s.mu_x * s.mu_x;
  s.syy = sum_yy / s.n - s.mu_y * s.mu_y;
  s.sxy = sum_xy / s.n - s.mu_x * s.mu_y;
  return s;
}

double ssim_from_stats(const WindowStats& s) {
  const double a1 = 2 * s.mu_x * s.mu_y + kSsimC1;
  const double a2 = 2 * s.sxy + kSsimC2;
  const double b1 = s.mu_x * s.mu_x + s.mu_y * s.mu_y + kSsimC1;
  const double b2 = s.sxx + s.syy + kSsimC2;
  return (a1 * a2) / (b1 * b2);
}

double affinity(double e0, double e1, double alpha) {
  return std::exp(-alpha * std::max(e0, e1));
}

struct VSForward {
  SampledImage synth;
  Grid<Eigen::Vector2d> coords;  // source-view sample positions
  Grid<Eigen::Vector3d> points;  // transformed 3D points
  double weight_sum = 0;
  double cost = 0;
};

/// Forward pass of the differentiable one-directional view-synthesis cost.
VSForward vs_forward(const ImageBuf& img_t, const ImageBuf& img_s,
                     const DepthMap& depth_t, const PoseSE3& T,
                     const Intrinsics& K, double beta, const Mask* weights) {
  if (img_t.width() != depth_t.width() || img_t.height() != depth_t.height() ||
      !img_t.same_size(img_s))
    throw std::invalid_argument("view_synthesis_cost: dimension mismatch");
  const int W = img_t.width(), H = img_t.height(), C = img_t.channels();

  VSForward f;
  f.synth.image = ImageBuf(W, H, C, 0.0);
  f.synth.valid = Mask(W, H, 0.0);
  f.coords = Grid<Eigen::Vector2d>(W, H, Eigen::Vector2d::Zero());
  f.points = Grid<Eigen::Vector3d>(W, H, Eigen::Vector3d::Zero());

  for (int y = 0; y < H; ++y) {
    for (int x = 0; x < W; ++x) {
      const double d = depth_t.at(x, y);
      if (!(d > 0))
        throw std::domain_error("view_synthesis_cost: non-positive depth");
      const Point3 X = transform(T, backproject(Pixel(x, y), d, K));
      f.points.at(x, y) = X;
      if (X.z() <= kMinDepth) continue;
      const Pixel q = project(X, K);
      f.coords.at(x, y) = q;
      const BilinearTap t = make_tap(W, H, q.x(), q.y());
      if (!t.valid) continue;
      for (int c = 0; c < C; ++c)
        f.synth.image.at(x, y, c) = tap_value(img_s, t, c);
      f.synth.valid.at(x, y) = 1.0;
    }
  }

  // Per-pixel cost over valid pixels.
  double acc = 0;
  for (int y = 0; y < H; ++y) {
    for (int x = 0; x < W; ++x) {
      if (f.synth.valid.at(x, y) == 0.0) continue;
      const double w = weights ? weights->at(x, y) : 1.0;
      if (w <= 0.0) continue;
      double photo = 0, dssim = 0;
      for (int c = 0; c < C; ++c) {
        photo += charbonnier(img_t.at(x, y, c) - f.synth.image.at(x, y, c));
        dssim += 1.0 - ssim_from_stats(
                           window_stats(img_t, f.synth.image, x, y, c));
      }
      acc += w * (photo / C + beta * 0.5 * dssim / C);
      f.weight_sum += w;
    }
  }
  if (f.weight_sum <= 0.0)
    throw std::domain_error("view_synthesis_cost: no valid pixels");
  f.cost = acc / f.weight_sum;
  return f;
}

}  // namespace

void LossWeights::validate() const {
  if (lambda_st < 0 || lambda_ms < 0 || lambda_vis < 0 || lambda_dne < 0 ||
      lambda_vs < 0 || beta < 0 || alpha < 0)
    throw std::domain_error("LossWeights: negative weight");
  if (n_scales < 1) throw std::domain_error("LossWeights: n_scales < 1");
}

SampledImage bilinear_sample(const ImageBuf& img, const FlowField2D& coords) {
  SampledImage out;
  out.image = ImageBuf(coords.width(), coords.height(), img.channels(), 0.0);
  out.valid = Mask(coords.width(), coords.height(), 0.0);
  for (int y = 0; y < coords.height(); ++y) {
    for (int x = 0; x < coords.width(); ++x) {
      if (!coords.valid.at(x, y)) continue;
      const Eigen::Vector2d& q = coords.vec.at(x, y);
      const BilinearTap t = make_tap(img.width(), img.height(), q.x(), q.y());
      if (!t.valid) continue;
      for (int c = 0; c < img.channels(); ++c)
        out.image.at(x, y, c) = tap_value(img, t, c);
      out.valid.at(x, y) = 1.0;
    }
  }
  return out;
}

SampledImage synthesize_view(const ImageBuf& src, const DepthMap& depth_t,
                             const PoseSE3& T, const Intrinsics& K) {
  const FlowField2D flow = rigid_flow_2d(depth_t, T, K);
  FlowField2D coords = flow;
  for (int y = 0; y < flow.height(); ++y)
    for (int x = 0; x < flow.width(); ++x)
      coords.vec.at(x, y) += Eigen::Vector2d(x, y);
  return bilinear_sample(src, coords);
}

Grid<double> ssim_map(const ImageBuf& a, const ImageBuf& b) {
  if (!a.same_size(b))
    throw std::invalid_argument("ssim_map: dimension mismatch");
  Grid<double> out(a.width(), a.height(), 0.0);
  for (int y = 0; y < a.height(); ++y) {
    for (int x = 0; x < a.width(); ++x) {
      double s = 0;
      for (int c = 0; c < a.channels(); ++c)
        s += ssim_from_stats(window_stats(a, b, x, y, c));
      out.at(x, y) = s / a.channels();
    }
  }
  return out;
}

double similarity_cost(const ImageBuf& img, const ImageBuf& synth, double beta,
                       const Mask& valid) {
  if (!img.same_size(synth) || img.width() != valid.width() ||
      img.height() != valid.height())
    throw std::invalid_argument("similarity_cost: dimension mismatch");
  const Grid<double> ssim = ssim_map(img, synth);
  double acc = 0;
  long n = 0;
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) {
      if (valid.at(x, y) == 0.0) continue;
      double photo = 0;
      for (int c = 0; c < img.channels(); ++c)
        photo += std::abs(img.at(x, y, c) - synth.at(x, y, c));
      acc += photo / img.channels() + beta * 0.5 * (1.0 - ssim.at(x, y));
      ++n;
    }
  }
  if (n == 0) throw std::domain_error("similarity_cost: no valid pixels");
  return acc / n;
}

double loss_st(const MotionField3D& rigid, const MotionField3D& flow_bg,
               const Mask* valid) {
  if (!rigid.same_size(flow_bg))
    throw std::invalid_argument("loss_st: dimension mismatch");
  double acc = 0;
  long n = 0;
  for (int y = 0; y < rigid.height(); ++y) {
    for (int x = 0; x < rigid.width(); ++x) {
      if (valid && valid->at(x, y) <= 0.0) continue;
      acc += (rigid.at(x, y) - flow_bg.at(x, y)).lpNorm<1>();
      ++n;
    }
  }
  if (n == 0) throw std::domain_error("loss_st: no valid pixels");
  return acc / n;
}

double loss_ms(const MotionField3D& dynamic, const EdgeMap& edges,
               double alpha) {
  if (dynamic.width() != edges.width() || dynamic.height() != edges.height())
    throw std::invalid_argument("loss_ms: dimension mismatch");
  const int dx4[] = {1, -1, 0, 0};
  const int dy4[] = {0, 0, 1, -1};
  double acc = 0;
  for (int y = 0; y < dynamic.height(); ++y) {
    for (int x = 0; x < dynamic.width(); ++x) {
      acc += dynamic.at(x, y).squaredNorm();
      for (int k = 0; k < 4; ++k) {
        const int nx = x + dx4[k], ny = y + dy4[k];
        if (!dynamic.contains(nx, ny)) continue;
        acc += (dynamic.at(x, y) - dynamic.at(nx, ny)).lpNorm<1>() *
               affinity(edges.at(x, y), edges.at(nx, ny), alpha);
      }
    }
  }
  return acc / dynamic.size();
}

double loss_vis(const Mask& segment) {
  double acc = 0;
  for (int y = 0; y < segment.height(); ++y) {
    for (int x = 0; x < segment.width(); ++x) {
      const double s = std::min(segment.at(x, y), 1.0 - 1e-6);
      if (s < 0.0) throw std::domain_error("loss_vis: mask value < 0");
      acc += -std::log(1.0 - s);
    }
  }
  return acc / segment.size();
}

double loss_smooth_dne(const DepthMap& depth, const EdgeMap& edges,
                       double alpha) {
  if (depth.width() != edges.width() || depth.height() != edges.height())
    throw std::invalid_argument("loss_smooth_dne: dimension mismatch");
  const int dx4[] = {1, -1, 0, 0};
  const int dy4[] = {0, 0, 1, -1};
  double acc = 0;
  for (int y = 0; y < depth.height(); ++y) {
    for (int x = 0; x < depth.width(); ++x) {
      for (int k = 0; k < 4; ++k) {
        const int nx = x + dx4[k], ny = y + dy4[k];
        if (!depth.contains(nx, ny)) continue;
        acc += std::abs(1.0 / depth.at(x, y) - 1.0 / depth.at(nx, ny)) *
               affinity(edges.at(x, y), edges.at(nx, ny), alpha);
      }
    }
  }
  return acc / depth.size();
}

double loss_bi_vs(const ImageBuf& img_t, const ImageBuf& img_s,
                  const DepthMap& depth_t, const DepthMap& depth_s,
                  const PoseSE3& T_ts, const Intrinsics& K, double beta) {
  const SampledImage synth_t = synthesize_view(img_s, depth_t, T_ts, K);
  const SampledImage synth_s =
      synthesize_view(img_t, depth_s, T_ts.inverse(), K);
  return similarity_cost(img_t, synth_t.image, beta, synth_t.valid) +
         similarity_cost(img_s, synth_s.image, beta, synth_s.valid);
}

EdgeMap edge_map_from_image(const ImageBuf& img) {
  const int W = img.width(), H = img.height();
  Grid<double> gray(W, H, 0.0);
  for (int y = 0; y < H; ++y)
    for (int x = 0; x < W; ++x) {
      double s = 0;
      for (int c = 0; c < img.channels(); ++c) s += img.at(x, y, c);
      gray.at(x, y) = s / img.channels();
    }
  EdgeMap edges(W, H, 0.0);
  double max_mag = 0;
  for (int y = 0; y < H; ++y) {
    for (int x = 0; x < W; ++x) {
      const double gx =
          (gray.at(std::min(x + 1, W - 1), y) - gray.at(std::max(x - 1, 0), y)) /
          2.0;
      const double gy =
          (gray.at(x, std::min(y + 1, H - 1)) - gray.at(x, std::max(y - 1, 0))) /
          2.0;
      const double m = std::hypot(gx, gy);
      edges.at(x, y) = m;
      max_mag = std::max(max_mag, m);
    }
  }
  if (max_mag > 0)
    for (int y = 0; y < H; ++y)
      for (int x = 0; x < W; ++x) edges.at(x, y) /= max_mag;
  return edges;
}

ImageBuf downsample2(const ImageBuf& img) {
  const int W = img.width() / 2, H = img.height() / 2;
  ImageBuf out(W, H, img.channels(), 0.0);
  for (int y = 0; y < H; ++y)
    for (int x = 0; x < W; ++x)
      for (int c = 0; c < img.channels(); ++c)
        out.at(x, y, c) =
            (img.at(2 * x, 2 * y, c) + img.at(2 * x + 1, 2 * y, c) +
             img.at(2 * x, 2 * y + 1, c) + img.at(2 * x + 1, 2 * y + 1, c)) /
            4.0;
  return out;
}

DepthMap downsample2(const DepthMap& depth) {
  const int W = depth.width() / 2, H = depth.height() / 2;
  DepthMap out(W, H, 0.0);
  for (int y = 0; y < H; ++y)
    for (int x = 0; x < W; ++x)
      out.at(x, y) =
          (depth.at(2 * x, 2 * y) + depth.at(2 * x + 1, 2 * y) +
           depth.at(2 * x, 2 * y + 1) + depth.at(2 * x + 1, 2 * y + 1)) /
          4.0;
  return out;
}

std::vector<std::pair<std::string, double>> LossBreakdown::items() const {
  std::vector<std::pair<std::string, double>> kv;
  kv.emplace_back("total", total);
  kv.emplace_back("st", st);
  kv.emplace_back("ms", ms);
  kv.emplace_back("vis", vis);
  for (size_t l = 0; l < dne.size(); ++l)
    kv.emplace_back("dne_l" + std::to_string(l), dne[l]);
  for (size_t l = 0; l < bi_vs.size(); ++l)
    kv.emplace_back("bi_vs_l" + std::to_string(l), bi_vs[l]);
  for (size_t l = 0; l < stereo_dne.size(); ++l)
    kv.emplace_back("stereo_dne_l" + std::to_string(l), stereo_dne[l]);
  for (size_t l = 0; l < stereo_bi_vs.size(); ++l)
    kv.emplace_back("stereo_bi_vs_l" + std::to_string(l), stereo_bi_vs[l]);
  return kv;
}

LossBreakdown loss_mono(const MonoInputs& in, const LossWeights& w) {
  w.validate();
  LossBreakdown out;

  const Mask vis = visibility_mask(in.flow_fwd, in.flow_bwd);
  const MotionField3D m_b =
      rigid_motion(in.depth_t, in.T_ts, in.segment, vis, in.K);
  const MotionField3D m_d = dynamic_motion(in.depth_t, in.depth_s, in.flow_fwd,
                                           in.segment, vis, in.K);
  const MotionField3D m_b_hat = flow_background_motion(
      in.depth_t, in.depth_s, in.flow_fwd, in.segment, vis, in.K);

  const EdgeMap edges_t =
      in.edges ? *in.edges : edge_map_from_image(in.img_t);

  out.st = loss_st(m_b, m_b_hat, &vis);
  out.ms = loss_ms(m_d, edges_t, w.alpha);
  out.vis = loss_vis(in.segment);

  ImageBuf img_t = in.img_t, img_s = in.img_s;
  DepthMap depth_t = in.depth_t, depth_s = in.depth_s;
  Intrinsics K = in.K;
  for (int l = 0; l < w.n_scales; ++l) {
    if (l > 0) {
      img_t = downsample2(img_t);
      img_s = downsample2(img_s);
      depth_t = downsample2(depth_t);
      depth_s = downsample2(depth_s);
      K = K.scaled(2);
    }
    const EdgeMap e_t = edge_map_from_image(img_t);
    const EdgeMap e_s = edge_map_from_image(img_s);
    out.dne.push_back(loss_smooth_dne(depth_t, e_t, w.alpha) +
                      loss_smooth_dne(depth_s, e_s, w.alpha));
    out.bi_vs.push_back(
        loss_bi_vs(img_t, img_s, depth_t, depth_s, in.T_ts, K, w.beta));
  }

  out.total = w.lambda_st * out.st + w.lambda_ms * out.ms +
              w.lambda_vis * out.vis;
  for (int l = 0; l < w.n_scales; ++l)
    out.total += w.lambda_dne * out.dne[l] + w.lambda_vs * out.bi_vs[l];
  return out;
}

LossBreakdown loss_mono_stereo(const MonoInputs& in, const ImageBuf& img_c,
                               const DepthMap& depth_c, const PoseSE3& T_tc,
                               const LossWeights& w) {
  LossBreakdown out = loss_mono(in, w);

  ImageBuf img_t = in.img_t, img_cc = img_c;
  DepthMap depth_t = in.depth_t, depth_cc = depth_c;
  Intrinsics K = in.K;
  for (int l = 0; l < w.n_scales; ++l) {
    if (l > 0) {
      img_t = downsample2(img_t);
      img_cc = downsample2(img_cc);
      depth_t = downsample2(depth_t);
      depth_cc = downsample2(depth_cc);
      K = K.scaled(2);
    }
    const EdgeMap e_c = edge_map_from_image(img_cc);
    out.stereo_dne.push_back(loss_smooth_dne(depth_cc, e_c, w.alpha));
    out.stereo_bi_vs.push_back(
        loss_bi_vs(img_t, img_cc, depth_t, depth_cc, T_tc, K, w.beta));
    out.total += w.lambda_dne * out.stereo_dne[l] +
                 w.lambda_vs * out.stereo_bi_vs[l];
  }
  return out;
}

double view_synthesis_cost(const ImageBuf& img_t, const ImageBuf& img_s,
                           const DepthMap& depth_t, const PoseSE3& T,
                           const Intrinsics& K, double beta,
                           const Mask* weights) {
  return vs_forward(img_t, img_s, depth_t, T, K, beta, weights).cost;
}

Twist grad_pose_vs(const ImageBuf& img_t, const ImageBuf& img_s,
                   const DepthMap& depth_t, const PoseSE3& T,
                   const Intrinsics& K, double beta, const Mask* weights) {
  const VSForward f = vs_forward(img_t, img_s, depth_t, T, K, beta, weights);
  const int W = img_t.width(), H = img_t.height(), C = img_t.channels();
  const ImageBuf& synth = f.synth.image;

  // Adjoint dC/d(synth) accumulated per pixel and channel.
  ImageBuf gbar(W, H, C, 0.0);
  for (int y = 0; y < H; ++y) {
    for (int x = 0; x < W; ++x) {
      if (f.synth.valid.at(x, y) == 0.0) continue;
      const double w = weights ? weights->at(x, y) : 1.0;
      if (w <= 0.0) continue;
      const double scale = w / f.weight_sum;
      for (int c = 0; c < C; ++c) {
        // Photometric term.
        gbar.at(x, y, c) +=
            scale / C *
            charbonnier_deriv(synth.at(x, y, c) - img_t.at(x, y, c));
        // SSIM term: distribute over the window of this center pixel.
        const WindowStats s = window_stats(img_t, synth, x, y, c);
        const double a1 = 2 * s.mu_x * s.mu_y + kSsimC1;
        const double a2 = 2 * s.sxy + kSsimC2;
        const double b1 = s.mu_x * s.mu_x + s.mu_y * s.mu_y + kSsimC1;
        const double b2 = s.sxx + s.syy + kSsimC2;
        const double denom = b1 * b2;
        for (int dy = -kSsimRadius; dy <= kSsimRadius; ++dy) {
          for (int dx = -kSsimRadius; dx <= kSsimRadius; ++dx) {
            const int qx = x + dx, qy = y + dy;
            if (qx < 0 || qx >= W || qy < 0 || qy >= H) continue;
            const double xj = img_t.at(qx, qy, c);
            const double yj = synth.at(qx, qy, c);
            const double dA1 = 2 * s.mu_x / s.n;
            const double dA2 = 2 * (xj - s.mu_x) / s.n;
            const double dB1 = 2 * s.mu_y / s.n;
            const double dB2 = 2 * (yj - s.mu_y) / s.n;
            const double dS = ((dA1 * a2 + a1 * dA2) * denom -
                               a1 * a2 * (dB1 * b2 + b1 * dB2)) /
                              (denom * denom);
            // d/dy_j of beta/2 * (1 - S)/C, weighted by the pixel scale.
            gbar.at(qx, qy, c) += -scale * beta * 0.5 / C * dS;
          }
        }
      }
    }
  }

  // Chain through bilinear sampling, projection and the left twist update.
  Twist grad = Twist::Zero();
  for (int y = 0; y < H; ++y) {
    for (int x = 0; x < W; ++x) {
      if (f.synth.valid.at(x, y) == 0.0) continue;
      const Eigen::Vector2d& q = f.coords.at(x, y);
      const BilinearTap t = make_tap(W, H, q.x(), q.y());
      Eigen::Vector2d g_uv = Eigen::Vector2d::Zero();
      for (int c = 0; c < C; ++c)
        g_uv += gbar.at(x, y, c) * tap_deriv(img_s, t, c);
      const Eigen::Vector3d& X = f.points.at(x, y);
      const double z = X.z();
      Eigen::Matrix<double, 2, 3> J_proj;
      J_proj << K.fx / z, 0, -K.fx * X.x() / (z * z), 0, K.fy / z,
          -K.fy * X.y() / (z * z);
      const Eigen::Vector3d r = J_proj.transpose() * g_uv;
      grad.head<3>() += r;
      grad.tail<3>() += X.cross(r);
    }
  }
  return grad;
}

}  // namespace evp
