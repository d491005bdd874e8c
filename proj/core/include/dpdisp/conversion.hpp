#pragma once

#include "dpdisp/types.hpp"

namespace dpdisp {

/// Disparity (pixels) of a point at depth z:
///   d = alpha * L f / (1 - f / z_f) * (1 / z_f - 1 / z)
/// Zero on the focal plane, positive behind it.
double disparity_from_depth(double z, const CameraParams& cam);

/// Algebraic inverse of disparity_from_depth. Returns NaN when the
/// disparity has no positive finite depth (at or beyond the z -> inf limit).
double depth_from_disparity(double d, const CameraParams& cam);

/// Disparity approached as z -> infinity.
double disparity_at_infinity(const CameraParams& cam);

/// Invalid depth pixels stay invalid. Throws ConfigError for an invalid camera.
DisparityMap depth_to_disparity(const DepthMap& z, const CameraParams& cam);

/// Pixels whose inversion is not a positive finite depth become invalid.
DepthMap disparity_to_depth(const DisparityMap& d, const CameraParams& cam);

}  // namespace dpdisp
