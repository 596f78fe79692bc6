// Color-coded visualizations for flow and 3D motion grids.

#ifndef EVP_VIZ_HPP
#define EVP_VIZ_HPP

#include "evp/grids.hpp"

namespace evp {

/// Optical-flow color wheel (hue = direction, saturation = magnitude).
/// `max_flow` <= 0 normalizes by the maximum magnitude in the field.
ImageBuf visualize_flow(const FlowField2D& flow, double max_flow = 0.0);

/// Maps 3D motion components to RGB around mid-gray. `max_motion` <= 0
/// normalizes by the maximum absolute component.
ImageBuf visualize_motion(const MotionField3D& motion, double max_motion = 0.0);

}  // namespace evp

#endif  // EVP_VIZ_HPP
