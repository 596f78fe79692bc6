// File codecs: PFM float grids, portable pixmaps / PNG rasters, and the
// KITTI 16-bit flow PNG encoding.

#ifndef EVP_IMAGE_IO_HPP
#define EVP_IMAGE_IO_HPP

#include <string>

#include "evp/grids.hpp"

namespace evp {

/// Raised on malformed or unsupported file content.
struct FormatError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// PFM ("Pf" single channel). Negative scale means little-endian.
Grid<double> read_pfm(const std::string& path);
void write_pfm(const std::string& path, const Grid<double>& grid);

/// KITTI flow convention: 16-bit RGB PNG, u = f_u * 64 + 2^15 (v likewise),
/// third channel is the validity bit. Round trip is exact to 1/64 px; flows
/// outside +-511 px are rejected.
FlowField2D read_kitti_flow_png(const std::string& path);
void write_kitti_flow_png(const std::string& path, const FlowField2D& flow);

/// 8/16-bit grayscale or RGB rasters (PPM/PGM always; PNG supported as the
/// compressed format). Intensities are normalized to [0, 1].
ImageBuf read_image(const std::string& path);
void write_image(const std::string& path, const ImageBuf& img,
                 int bit_depth = 8);

/// KITTI-style 16-bit depth PNG: stored integer value = depth * 256, zero
/// marks missing.
DepthMap read_depth_png(const std::string& path, Mask* valid = nullptr);
void write_depth_png(const std::string& path, const DepthMap& depth,
                     const Mask* valid = nullptr);

}  // namespace evp

#endif  // EVP_IMAGE_IO_HPP
