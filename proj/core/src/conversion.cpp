#include "dpdisp/conversion.hpp"

#include <cmath>

namespace dpdisp {

double disparity_from_depth(double z, const CameraParams& cam) {
  return cam.alpha * cam.blur_scale() * (1.0 / cam.focus_distance - 1.0 / z);
}

double depth_from_disparity(double d, const CameraParams& cam) {
  const double inv_z = 1.0 / cam.focus_distance - d / (cam.alpha * cam.blur_scale());
  const double z = 1.0 / inv_z;
  if (!(inv_z > 0.0) || !std::isfinite(z) || !(z > 0.0)) return kInvalidValue;
  return z;
}

double disparity_at_infinity(const CameraParams& cam) {
  return cam.alpha * cam.blur_scale() / cam.focus_distance;
}

DisparityMap depth_to_disparity(const DepthMap& z, const CameraParams& cam) {
  cam.validate();
  DisparityMap d(z.width(), z.height());
  for (std::size_t i = 0; i < z.values.size(); ++i) {
    if (!z.valid[i]) continue;
    const double v = z.values[i];
    if (!(v > 0.0) || !std::isfinite(v)) continue;
    d.values[i] = disparity_from_depth(v, cam);
    d.valid[i] = 1;
  }
  return d;
}

DepthMap disparity_to_depth(const DisparityMap& d, const CameraParams& cam) {
  cam.validate();
  DepthMap z(d.width(), d.height());
  for (std::size_t i = 0; i < d.values.size(); ++i) {
    if (!d.valid[i] || !std::isfinite(d.values[i])) continue;
    const double v = depth_from_disparity(d.values[i], cam);
    if (std::isnan(v)) continue;
    z.values[i] = v;
    z.valid[i] = 1;
  }
  return z;
}

}  // namespace dpdisp
