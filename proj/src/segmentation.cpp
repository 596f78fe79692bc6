#include "evp/segmentation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <stdexcept>

#include "evp/hmp.hpp"

namespace evp {

namespace {

constexpr double kVarFloor = 1e-12;
constexpr double kCostCap = 1e12;

double gauss_log_pdf(double x, double mean, double var) {
  const double d = x - mean;
  return -0.5 * std::log(2.0 * M_PI * var) - 0.5 * d * d / var;
}

/// Dinic max-flow on a general directed graph with double capacities.
class MaxFlow {
 public:
  explicit MaxFlow(int n) : head_(n, -1), level_(n), it_(n) {}

  void add_edge(int from, int to, double cap, double rev_cap = 0.0) {
    edges_.push_back({to, head_[from], cap});
    head_[from] = static_cast<int>(edges_.size()) - 1;
    edges_.push_back({from, head_[to], rev_cap});
    head_[to] = static_cast<int>(edges_.size()) - 1;
  }

  double solve(int s, int t) {
    double flow = 0;
    while (bfs(s, t)) {
      it_ = head_;
      double f;
      while ((f = dfs(s, t, std::numeric_limits<double>::infinity())) > 0)
        flow += f;
    }
    return flow;
  }

  /// After solve(): true if the node is reachable from s in the residual
  /// graph (source side of the min cut).
  bool source_side(int v) const { return level_[v] >= 0; }

 private:
  struct Edge {
    int to;
    int next;
    double cap;
  };

  bool bfs(int s, int t) {
    std::fill(level_.begin(), level_.end(), -1);
    std::queue<int> q;
    level_[s] = 0;
    q.push(s);
    while (!q.empty()) {
      const int v = q.front();
      q.pop();
      for (int e = head_[v]; e != -1; e = edges_[e].next) {
        if (edges_[e].cap > 1e-14 && level_[edges_[e].to] < 0) {
          level_[edges_[e].to] = level_[v] + 1;
          q.push(edges_[e].to);
        }
      }
    }
    return level_[t] >= 0;
  }

  double dfs(int v, int t, double f) {
    if (v == t) return f;
    for (int& e = it_[v]; e != -1; e = edges_[e].next) {
      Edge& ed = edges_[e];
      if (ed.cap > 1e-14 && level_[ed.to] == level_[v] + 1) {
        const double d = dfs(ed.to, t, std::min(f, ed.cap));
        if (d > 0) {
          ed.cap -= d;
          edges_[e ^ 1].cap += d;
          return d;
        }
      }
    }
    return 0;
  }

  std::vector<Edge> edges_;
  std::vector<int> head_;
  std::vector<int> level_;
  std::vector<int> it_;
};

double quantile(std::vector<double> sorted, double q) {
  const size_t idx = static_cast<size_t>(q * (sorted.size() - 1));
  return sorted[idx];
}

double auto_contrast_scale(const Grid<double>& residual) {
  double sum = 0;
  long n = 0;
  for (int y = 0; y < residual.height(); ++y) {
    for (int x = 0; x < residual.width(); ++x) {
      if (x + 1 < residual.width()) {
        const double d = residual.at(x + 1, y) - residual.at(x, y);
        sum += d * d;
        ++n;
      }
      if (y + 1 < residual.height()) {
        const double d = residual.at(x, y + 1) - residual.at(x, y);
        sum += d * d;
        ++n;
      }
    }
  }
  const double scale = n > 0 ? 2.0 * sum / n : 0.0;
  return scale > 0 ? scale : 1.0;
}

}  // namespace

double Gmm2::log_likelihood(double x) const {
  const double l0 = std::log(weight0) + gauss_log_pdf(x, mean0, var0);
  const double l1 = std::log(weight1) + gauss_log_pdf(x, mean1, var1);
  const double m = std::max(l0, l1);
  return m + std::log(std::exp(l0 - m) + std::exp(l1 - m));
}

std::pair<double, double> Gmm2::component_costs(double x) const {
  const double c0 = -(std::log(weight0) + gauss_log_pdf(x, mean0, var0));
  const double c1 = -(std::log(weight1) + gauss_log_pdf(x, mean1, var1));
  return {std::min(c0, kCostCap), std::min(c1, kCostCap)};
}

Grid<double> residual_flow(const MotionField3D& full,
                           const MotionField3D& rigid) {
  if (!full.same_size(rigid))
    throw std::invalid_argument("residual_flow: dimension mismatch");
  Grid<double> out(full.width(), full.height(), 0.0);
  for (int y = 0; y < full.height(); ++y)
    for (int x = 0; x < full.width(); ++x)
      out.at(x, y) = (full.at(x, y) - rigid.at(x, y)).norm();
  return out;
}

Gmm2 fit_gmm2(const std::vector<double>& samples,
              const GmmFitSettings& settings) {
  if (samples.size() < 2)
    throw std::domain_error("fit_gmm2: need at least two samples");
  std::vector<double> sorted = samples;
  std::sort(sorted.begin(), sorted.end());
  if (sorted.front() == sorted.back())
    throw std::domain_error("fit_gmm2: degenerate all-equal samples");

  const size_t n = samples.size();
  Gmm2 g;
  g.mean0 = quantile(sorted, 0.25);
  g.mean1 = quantile(sorted, 0.75);
  if (g.mean0 == g.mean1) {
    g.mean0 = sorted.front();
    g.mean1 = sorted.back();
  }
  double var = 0, mean = 0;
  for (double x : samples) mean += x;
  mean /= n;
  for (double x : samples) var += (x - mean) * (x - mean);
  var = std::max(var / n, kVarFloor);
  g.var0 = g.var1 = var;

  std::vector<double> resp(n);
  double prev_ll = -std::numeric_limits<double>::infinity();
  for (int iter = 0; iter < settings.max_iters; ++iter) {
    // E step: responsibility of component 1.
    double ll = 0;
    for (size_t i = 0; i < n; ++i) {
      const double l0 =
          std::log(g.weight0) + gauss_log_pdf(samples[i], g.mean0, g.var0);
      const double l1 =
          std::log(g.weight1) + gauss_log_pdf(samples[i], g.mean1, g.var1);
      const double m = std::max(l0, l1);
      const double z = std::exp(l0 - m) + std::exp(l1 - m);
      resp[i] = std::exp(l1 - m) / z;
      ll += m + std::log(z);
    }
    if (ll - prev_ll < settings.tol && iter > 0) break;
    prev_ll = ll;

    // M step.
    double n1 = 0, s1 = 0, s0 = 0;
    for (size_t i = 0; i < n; ++i) {
      n1 += resp[i];
      s1 += resp[i] * samples[i];
      s0 += (1.0 - resp[i]) * samples[i];
    }
    const double n0 = n - n1;
    if (n0 <= 0 || n1 <= 0) break;  // one component vanished
    g.mean0 = s0 / n0;
    g.mean1 = s1 / n1;
    double v0 = 0, v1 = 0;
    for (size_t i = 0; i < n; ++i) {
      v0 += (1.0 - resp[i]) * (samples[i] - g.mean0) * (samples[i] - g.mean0);
      v1 += resp[i] * (samples[i] - g.mean1) * (samples[i] - g.mean1);
    }
    g.var0 = std::max(v0 / n0, kVarFloor);
    g.var1 = std::max(v1 / n1, kVarFloor);
    g.weight0 = n0 / n;
    g.weight1 = n1 / n;
  }

  if (g.mean0 > g.mean1) {
    std::swap(g.mean0, g.mean1);
    std::swap(g.var0, g.var1);
    std::swap(g.weight0, g.weight1);
  }
  return g;
}

double segmentation_energy(const Grid<double>& residual, const Gmm2& gmm,
                           double pairwise_weight, double contrast_scale,
                           const Mask& labels) {
  if (!residual.same_size(labels))
    throw std::invalid_argument("segmentation_energy: dimension mismatch");
  if (contrast_scale <= 0) contrast_scale = auto_contrast_scale(residual);
  double e = 0;
  for (int y = 0; y < residual.height(); ++y) {
    for (int x = 0; x < residual.width(); ++x) {
      const auto [c0, c1] = gmm.component_costs(residual.at(x, y));
      e += labels.at(x, y) > 0.5 ? c1 : c0;
      if (x + 1 < residual.width() &&
          (labels.at(x, y) > 0.5) != (labels.at(x + 1, y) > 0.5)) {
        const double d = residual.at(x + 1, y) - residual.at(x, y);
        e += pairwise_weight * std::exp(-d * d / contrast_scale);
      }
      if (y + 1 < residual.height() &&
          (labels.at(x, y) > 0.5) != (labels.at(x, y + 1) > 0.5)) {
        const double d = residual.at(x, y + 1) - residual.at(x, y);
        e += pairwise_weight * std::exp(-d * d / contrast_scale);
      }
    }
  }
  return e;
}

Mask graph_cut_segment(const Grid<double>& residual, const Gmm2& gmm,
                       double pairwise_weight, double contrast_scale) {
  if (pairwise_weight < 0)
    throw std::domain_error("graph_cut_segment: negative pairwise weight");
  if (contrast_scale <= 0) contrast_scale = auto_contrast_scale(residual);

  const int W = residual.width(), H = residual.height();
  const int n = W * H;
  const int src = n, snk = n + 1;
  MaxFlow mf(n + 2);

  for (int y = 0; y < H; ++y) {
    for (int x = 0; x < W; ++x) {
      const int v = y * W + x;
      auto [c0, c1] = gmm.component_costs(residual.at(x, y));
      // Shift per pixel so capacities stay non-negative; the argmin and all
      // energy differences are unchanged.
      const double base = std::min(c0, c1);
      mf.add_edge(src, v, c1 - base);  // paid when v lands on the sink side
      mf.add_edge(v, snk, c0 - base);  // paid when v lands on the source side
      if (x + 1 < W) {
        const double d = residual.at(x + 1, y) - residual.at(x, y);
        const double w = pairwise_weight * std::exp(-d * d / contrast_scale);
        mf.add_edge(v, v + 1, w, w);
      }
      if (y + 1 < H) {
        const double d = residual.at(x, y + 1) - residual.at(x, y);
        const double w = pairwise_weight * std::exp(-d * d / contrast_scale);
        mf.add_edge(v, v + W, w, w);
      }
    }
  }

  mf.solve(src, snk);
  Mask labels(W, H, 0.0);
  for (int y = 0; y < H; ++y)
    for (int x = 0; x < W; ++x)
      labels.at(x, y) = mf.source_side(y * W + x) ? 0.0 : 1.0;
  return labels;
}

Mask segment_moving_objects(const DepthMap& depth_t, const DepthMap& depth_s,
                            const FlowField2D& flow_fwd,
                            const FlowField2D& flow_bwd, const PoseSE3& T,
                            const Intrinsics& K, const SegmentParams& params) {
  const Mask vis =
      visibility_mask(flow_fwd, flow_bwd, params.alpha1, params.alpha2);
  const Mask no_segment(depth_t.width(), depth_t.height(), 0.0);
  const MotionField3D rigid = rigid_motion(depth_t, T, no_segment, vis, K);
  const MotionField3D full = flow_background_motion(depth_t, depth_s, flow_fwd,
                                                    no_segment, vis, K);
  const Grid<double> residual = residual_flow(full, rigid);

  std::vector<double> samples;
  samples.reserve(residual.size());
  for (int y = 0; y < residual.height(); ++y)
    for (int x = 0; x < residual.width(); ++x)
      samples.push_back(residual.at(x, y));
  Gmm2 gmm;
  try {
    gmm = fit_gmm2(samples, params.gmm);
  } catch (const std::domain_error&) {
    // All residuals identical (e.g. a perfectly static scene): nothing moves.
    return Mask(depth_t.width(), depth_t.height(), 0.0);
  }
  return graph_cut_segment(residual, gmm, params.pairwise_weight,
                           params.contrast_scale);
}

}  // namespace evp
