// Dense per-pixel grid containers shared by all modules.

#ifndef EVP_GRIDS_HPP
#define EVP_GRIDS_HPP

#include <Eigen/Core>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace evp {

/// Row-major H x W grid of T. (x, y) indexing with x = column, y = row.
template <typename T>
class Grid {
 public:
  Grid() = default;
  Grid(int width, int height, const T& fill = T())
      : width_(width), height_(height) {
    if (width < 1 || height < 1)
      throw std::invalid_argument("Grid: non-positive dimensions");
    data_.assign(static_cast<size_t>(width) * height, fill);
  }

  int width() const { return width_; }
  int height() const { return height_; }
  size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  T& at(int x, int y) { return data_[static_cast<size_t>(y) * width_ + x]; }
  const T& at(int x, int y) const {
    return data_[static_cast<size_t>(y) * width_ + x];
  }
  bool contains(int x, int y) const {
    return x >= 0 && x < width_ && y >= 0 && y < height_;
  }

  T* data() { return data_.data(); }
  const T* data() const { return data_.data(); }

  bool same_size(const Grid& o) const {
    return width_ == o.width_ && height_ == o.height_;
  }

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<T> data_;
};

/// Per-pixel depth in meters; values must stay positive and finite.
using DepthMap = Grid<double>;

/// Per-pixel weight in [0, 1]; serves both the moving-object mask S and the
/// visibility mask V.
using Mask = Grid<double>;

/// Per-pixel edge strength, non-negative.
using EdgeMap = Grid<double>;

/// Per-pixel 3D motion vectors in meters.
using MotionField3D = Grid<Eigen::Vector3d>;

/// 2D pixel displacement field with a per-pixel validity flag.
struct FlowField2D {
  FlowField2D() = default;
  FlowField2D(int width, int height)
      : vec(width, height, Eigen::Vector2d::Zero()), valid(width, height, 1) {}

  int width() const { return vec.width(); }
  int height() const { return vec.height(); }
  bool same_size(const FlowField2D& o) const { return vec.same_size(o.vec); }

  Grid<Eigen::Vector2d> vec;
  Grid<uint8_t> valid;
};

/// H x W x C intensity image, values in [0, 1], C in {1, 3}.
class ImageBuf {
 public:
  ImageBuf() = default;
  ImageBuf(int width, int height, int channels, double fill = 0.0)
      : width_(width), height_(height), channels_(channels) {
    if (width < 1 || height < 1)
      throw std::invalid_argument("ImageBuf: non-positive dimensions");
    if (channels != 1 && channels != 3)
      throw std::invalid_argument("ImageBuf: channels must be 1 or 3");
    data_.assign(static_cast<size_t>(width) * height * channels, fill);
  }

  int width() const { return width_; }
  int height() const { return height_; }
  int channels() const { return channels_; }

  double& at(int x, int y, int c) {
    return data_[(static_cast<size_t>(y) * width_ + x) * channels_ + c];
  }
  double at(int x, int y, int c) const {
    return data_[(static_cast<size_t>(y) * width_ + x) * channels_ + c];
  }

  bool same_size(const ImageBuf& o) const {
    return width_ == o.width_ && height_ == o.height_ &&
           channels_ == o.channels_;
  }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }
  size_t size() const { return data_.size(); }

 private:
  int width_ = 0;
  int height_ = 0;
  int channels_ = 0;
  std::vector<double> data_;
};

}  // namespace evp

#endif  // EVP_GRIDS_HPP
