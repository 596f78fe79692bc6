#include "evp/image_io.hpp"

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>

#include <unistd.h>

#include <algorithm>
#include <bit>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace evp {

namespace {

namespace fs = std::filesystem;

/// Write-temp-then-rename so concurrent readers never see partial files.
class AtomicFile {
 public:
  explicit AtomicFile(const std::string& path)
      : final_(path),
        tmp_(path + ".tmp-" + std::to_string(::getpid()) +
             fs::path(path).extension().string()) {}
  ~AtomicFile() {
    if (!committed_) {
      std::error_code ec;
      fs::remove(tmp_, ec);
    }
  }
  const std::string& tmp_path() const { return tmp_; }
  void commit() {
    fs::rename(tmp_, final_);
    committed_ = true;
  }

 private:
  std::string final_, tmp_;
  bool committed_ = false;
};

bool host_is_little_endian() {
  return std::endian::native == std::endian::little;
}

void byteswap_floats(std::vector<float>& v) {
  for (float& f : v) {
    uint32_t u;
    std::memcpy(&u, &f, 4);
    u = __builtin_bswap32(u);
    std::memcpy(&f, &u, 4);
  }
}

std::string read_pnm_token(std::istream& in) {
  std::string tok;
  char c;
  while (in.get(c)) {
    if (c == '#') {  // comment to end of line
      while (in.get(c) && c != '\n') {
      }
      continue;
    }
    if (std::isspace(static_cast<unsigned char>(c))) {
      if (!tok.empty()) break;
      continue;
    }
    tok.push_back(c);
  }
  return tok;
}

cv::Mat imread_checked(const std::string& path, int flags) {
  if (!fs::exists(path)) throw FormatError("file not found: " + path);
  cv::Mat m = cv::imread(path, flags);
  if (m.empty()) throw FormatError("cannot decode image: " + path);
  return m;
}

void imwrite_atomic(const std::string& path, const cv::Mat& m) {
  AtomicFile af(path);
  if (!cv::imwrite(af.tmp_path(), m))
    throw FormatError("cannot encode image: " + path);
  af.commit();
}

bool has_extension(const std::string& path, const char* ext) {
  std::string e = fs::path(path).extension().string();
  for (char& c : e) c = std::tolower(static_cast<unsigned char>(c));
  return e == ext;
}

ImageBuf read_pnm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open: " + path);
  const std::string magic = read_pnm_token(in);
  int channels;
  if (magic == "P5")
    channels = 1;
  else if (magic == "P6")
    channels = 3;
  else
    throw FormatError("unsupported magic '" + magic + "' in " + path);
  int width, height, maxval;
  try {
    width = std::stoi(read_pnm_token(in));
    height = std::stoi(read_pnm_token(in));
    maxval = std::stoi(read_pnm_token(in));
  } catch (const std::exception&) {
    throw FormatError("malformed PNM header in " + path);
  }
  if (width < 1 || height < 1 || (maxval != 255 && maxval != 65535))
    throw FormatError("unsupported PNM geometry/maxval in " + path);

  ImageBuf img(width, height, channels);
  const size_t n = static_cast<size_t>(width) * height * channels;
  if (maxval == 255) {
    std::vector<uint8_t> buf(n);
    in.read(reinterpret_cast<char*>(buf.data()), n);
    if (!in) throw FormatError("truncated PNM data in " + path);
    for (size_t i = 0; i < n; ++i) img.data()[i] = buf[i] / 255.0;
  } else {
    std::vector<uint8_t> buf(n * 2);
    in.read(reinterpret_cast<char*>(buf.data()), n * 2);
    if (!in) throw FormatError("truncated PNM data in " + path);
    for (size_t i = 0; i < n; ++i) {
      const int v = (buf[2 * i] << 8) | buf[2 * i + 1];  // big-endian
      img.data()[i] = v / 65535.0;
    }
  }
  return img;
}

void write_pnm(const std::string& path, const ImageBuf& img, int bit_depth) {
  AtomicFile af(path);
  {
    std::ofstream out(af.tmp_path(), std::ios::binary);
    if (!out) throw FormatError("cannot open for write: " + path);
    out << (img.channels() == 1 ? "P5" : "P6") << "\n"
        << img.width() << " " << img.height() << "\n"
        << (bit_depth == 8 ? 255 : 65535) << "\n";
    const size_t n = img.size();
    if (bit_depth == 8) {
      std::vector<uint8_t> buf(n);
      for (size_t i = 0; i < n; ++i)
        buf[i] = static_cast<uint8_t>(
            std::lround(std::clamp(img.data()[i], 0.0, 1.0) * 255.0));
      out.write(reinterpret_cast<const char*>(buf.data()), n);
    } else {
      std::vector<uint8_t> buf(n * 2);
      for (size_t i = 0; i < n; ++i) {
        const int v = static_cast<int>(
            std::lround(std::clamp(img.data()[i], 0.0, 1.0) * 65535.0));
        buf[2 * i] = static_cast<uint8_t>(v >> 8);
        buf[2 * i + 1] = static_cast<uint8_t>(v & 0xff);
      }
      out.write(reinterpret_cast<const char*>(buf.data()), buf.size());
    }
    if (!out) throw FormatError("write failed: " + path);
  }
  af.commit();
}

ImageBuf read_png(const std::string& path) {
  cv::Mat m = imread_checked(path, cv::IMREAD_UNCHANGED);
  if (m.channels() != 1 && m.channels() != 3)
    throw FormatError("unsupported channel count in " + path);
  const int W = m.cols, H = m.rows, C = m.channels();
  ImageBuf img(W, H, C);
  const double scale = m.depth() == CV_16U ? 65535.0 : 255.0;
  for (int y = 0; y < H; ++y) {
    for (int x = 0; x < W; ++x) {
      for (int c = 0; c < C; ++c) {
        double v;
        if (m.depth() == CV_16U)
          v = C == 1 ? m.at<uint16_t>(y, x) : m.at<cv::Vec3w>(y, x)[2 - c];
        else if (m.depth() == CV_8U)
          v = C == 1 ? m.at<uint8_t>(y, x) : m.at<cv::Vec3b>(y, x)[2 - c];
        else
          throw FormatError("unsupported bit depth in " + path);
        img.at(x, y, c) = v / scale;
      }
    }
  }
  return img;
}

void write_png(const std::string& path, const ImageBuf& img, int bit_depth) {
  const int W = img.width(), H = img.height(), C = img.channels();
  cv::Mat m;
  if (bit_depth == 8) {
    m = cv::Mat(H, W, C == 1 ? CV_8UC1 : CV_8UC3);
    for (int y = 0; y < H; ++y)
      for (int x = 0; x < W; ++x)
        for (int c = 0; c < C; ++c) {
          const auto v = static_cast<uint8_t>(
              std::lround(std::clamp(img.at(x, y, c), 0.0, 1.0) * 255.0));
          if (C == 1)
            m.at<uint8_t>(y, x) = v;
          else
            m.at<cv::Vec3b>(y, x)[2 - c] = v;  // RGB -> BGR
        }
  } else {
    m = cv::Mat(H, W, C == 1 ? CV_16UC1 : CV_16UC3);
    for (int y = 0; y < H; ++y)
      for (int x = 0; x < W; ++x)
        for (int c = 0; c < C; ++c) {
          const auto v = static_cast<uint16_t>(
              std::lround(std::clamp(img.at(x, y, c), 0.0, 1.0) * 65535.0));
          if (C == 1)
            m.at<uint16_t>(y, x) = v;
          else
            m.at<cv::Vec3w>(y, x)[2 - c] = v;
        }
  }
  imwrite_atomic(path, m);
}

}  // namespace

Grid<double> read_pfm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open: " + path);
  const std::string magic = read_pnm_token(in);
  if (magic == "PF")
    throw FormatError("color PFM not supported: " + path);
  if (magic != "Pf") throw FormatError("not a PFM file: " + path);
  int width, height;
  double scale;
  try {
    width = std::stoi(read_pnm_token(in));
    height = std::stoi(read_pnm_token(in));
    scale = std::stod(read_pnm_token(in));
  } catch (const std::exception&) {
    throw FormatError("malformed PFM header in " + path);
  }
  if (width < 1 || height < 1)
    throw FormatError("bad PFM dimensions in " + path);
  if (scale == 0) throw FormatError("zero PFM scale in " + path);

  std::vector<float> buf(static_cast<size_t>(width) * height);
  in.read(reinterpret_cast<char*>(buf.data()), buf.size() * sizeof(float));
  if (!in) throw FormatError("truncated PFM data in " + path);
  const bool file_little = scale < 0;
  if (file_little != host_is_little_endian()) byteswap_floats(buf);

  // PFM stores rows bottom-to-top.
  Grid<double> grid(width, height);
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x)
      grid.at(x, y) = buf[static_cast<size_t>(height - 1 - y) * width + x];
  return grid;
}

void write_pfm(const std::string& path, const Grid<double>& grid) {
  if (grid.empty()) throw FormatError("write_pfm: empty grid");
  AtomicFile af(path);
  {
    std::ofstream out(af.tmp_path(), std::ios::binary);
    if (!out) throw FormatError("cannot open for write: " + path);
    const double scale = host_is_little_endian() ? -1.0 : 1.0;
    out << "Pf\n" << grid.width() << " " << grid.height() << "\n" << scale
        << "\n";
    std::vector<float> buf(grid.size());
    for (int y = 0; y < grid.height(); ++y)
      for (int x = 0; x < grid.width(); ++x)
        buf[static_cast<size_t>(grid.height() - 1 - y) * grid.width() + x] =
            static_cast<float>(grid.at(x, y));
    out.write(reinterpret_cast<const char*>(buf.data()),
              buf.size() * sizeof(float));
    if (!out) throw FormatError("write failed: " + path);
  }
  af.commit();
}

FlowField2D read_kitti_flow_png(const std::string& path) {
  cv::Mat m = imread_checked(path, cv::IMREAD_UNCHANGED);
  if (m.type() != CV_16UC3)
    throw FormatError("not a 16-bit 3-channel flow PNG: " + path);
  FlowField2D flow(m.cols, m.rows);
  for (int y = 0; y < m.rows; ++y) {
    for (int x = 0; x < m.cols; ++x) {
      const cv::Vec3w px = m.at<cv::Vec3w>(y, x);  // BGR
      const bool valid = px[0] != 0;
      flow.valid.at(x, y) = valid ? 1 : 0;
      if (valid)
        flow.vec.at(x, y) = {(px[2] - 32768.0) / 64.0,
                             (px[1] - 32768.0) / 64.0};
      else
        flow.vec.at(x, y).setZero();
    }
  }
  return flow;
}

void write_kitti_flow_png(const std::string& path, const FlowField2D& flow) {
  cv::Mat m(flow.height(), flow.width(), CV_16UC3);
  for (int y = 0; y < flow.height(); ++y) {
    for (int x = 0; x < flow.width(); ++x) {
      cv::Vec3w& px = m.at<cv::Vec3w>(y, x);
      if (flow.valid.at(x, y)) {
        const Eigen::Vector2d& f = flow.vec.at(x, y);
        const long u = std::lround(f.x() * 64.0 + 32768.0);
        const long v = std::lround(f.y() * 64.0 + 32768.0);
        if (u < 0 || u > 65535 || v < 0 || v > 65535)
          throw FormatError("flow out of encodable range");
        px = {1, static_cast<uint16_t>(v), static_cast<uint16_t>(u)};
      } else {
        px = {0, 32768, 32768};
      }
    }
  }
  imwrite_atomic(path, m);
}

ImageBuf read_image(const std::string& path) {
  if (has_extension(path, ".png")) return read_png(path);
  if (has_extension(path, ".ppm") || has_extension(path, ".pgm") ||
      has_extension(path, ".pnm"))
    return read_pnm(path);
  throw FormatError("unsupported image format: " + path);
}

void write_image(const std::string& path, const ImageBuf& img,
                 int bit_depth) {
  if (bit_depth != 8 && bit_depth != 16)
    throw FormatError("bit depth must be 8 or 16");
  if (has_extension(path, ".png")) {
    write_png(path, img, bit_depth);
    return;
  }
  if (has_extension(path, ".ppm") || has_extension(path, ".pgm") ||
      has_extension(path, ".pnm")) {
    write_pnm(path, img, bit_depth);
    return;
  }
  throw FormatError("unsupported image format: " + path);
}

DepthMap read_depth_png(const std::string& path, Mask* valid) {
  cv::Mat m = imread_checked(path, cv::IMREAD_UNCHANGED);
  if (m.type() != CV_16UC1)
    throw FormatError("not a 16-bit single-channel depth PNG: " + path);
  DepthMap depth(m.cols, m.rows, 1e-3);
  if (valid) *valid = Mask(m.cols, m.rows, 0.0);
  for (int y = 0; y < m.rows; ++y) {
    for (int x = 0; x < m.cols; ++x) {
      const uint16_t v = m.at<uint16_t>(y, x);
      if (v > 0) {
        depth.at(x, y) = v / 256.0;
        if (valid) valid->at(x, y) = 1.0;
      }
    }
  }
  return depth;
}

void write_depth_png(const std::string& path, const DepthMap& depth,
                     const Mask* valid) {
  cv::Mat m(depth.height(), depth.width(), CV_16UC1);
  for (int y = 0; y < depth.height(); ++y) {
    for (int x = 0; x < depth.width(); ++x) {
      if (valid && valid->at(x, y) <= 0.0) {
        m.at<uint16_t>(y, x) = 0;
        continue;
      }
      const long v = std::lround(depth.at(x, y) * 256.0);
      m.at<uint16_t>(y, x) =
          static_cast<uint16_t>(std::clamp(v, 1L, 65535L));
    }
  }
  imwrite_atomic(path, m);
}

}  // namespace evp
