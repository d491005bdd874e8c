#include "dpdisp/types.hpp"

#include <algorithm>
#include <sstream>

#include "dpdisp/error.hpp"

namespace dpdisp {

Image::Image(int width, int height, int channels, double fill) : width_(width), height_(height) {
  if (channels != 1 && channels != 3) throw std::invalid_argument("image must have 1 or 3 channels");
  planes_.assign(static_cast<std::size_t>(channels), GridD(width, height, fill));
}

Image::Image(GridD gray) : width_(gray.width()), height_(gray.height()) {
  planes_.push_back(std::move(gray));
}

GridD Image::gray() const {
  if (planes_.size() == 1) return planes_.front();
  GridD out(width_, height_);
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = 0.299 * planes_[0][i] + 0.587 * planes_[1][i] + 0.114 * planes_[2][i];
  }
  return out;
}

CameraParams CameraParams::from_f_number(double focal_length, double f_number,
                                         double focus_distance, double alpha) {
  if (!(f_number > 0.0) || !std::isfinite(f_number)) {
    throw ConfigError("f_number must be positive and finite");
  }
  CameraParams cam;
  cam.focal_length = focal_length;
  cam.f_number = f_number;
  cam.aperture = focal_length / f_number;
  cam.focus_distance = focus_distance;
  cam.alpha = alpha;
  cam.validate();
  return cam;
}

void CameraParams::validate() const {
  auto bad = [](const char* what, double v) {
    std::ostringstream os;
    os << "camera: " << what << " (got " << v << ")";
    throw ConfigError(os.str());
  };
  if (!(focal_length > 0.0) || !std::isfinite(focal_length)) bad("focal length must be > 0", focal_length);
  if (!(aperture > 0.0) || !std::isfinite(aperture)) bad("aperture must be > 0", aperture);
  if (!(alpha > 0.0) || !std::isfinite(alpha)) bad("alpha must be > 0", alpha);
  if (!std::isfinite(focus_distance) || !(focus_distance > focal_length)) {
    bad("focus distance must exceed the focal length", focus_distance);
  }
  const double derived = focal_length / aperture;
  if (std::abs(f_number - derived) > 1e-9 * std::abs(derived)) {
    bad("f_number inconsistent with focal_length / aperture", f_number);
  }
}

ConfidenceMap::ConfidenceMap(GridD v) : values(std::move(v)) {
  for (auto& x : values.values()) x = std::isnan(x) ? 0.0 : std::clamp(x, 0.0, 1.0);
}

ConfidenceMap ConfidenceMap::from_mask(const Mask& m) {
  ConfidenceMap c(m.width(), m.height());
  for (std::size_t i = 0; i < m.size(); ++i) c.values[i] = m[i] ? 1.0 : 0.0;
  return c;
}

ConfidenceMap ConfidenceMap::binarized(double threshold) const {
  ConfidenceMap c(width(), height());
  for (std::size_t i = 0; i < values.size(); ++i) c.values[i] = values[i] >= threshold ? 1.0 : 0.0;
  return c;
}

Mask ConfidenceMap::to_mask(double threshold) const {
  Mask m(width(), height(), 0);
  for (std::size_t i = 0; i < values.size(); ++i) m[i] = values[i] >= threshold ? 1 : 0;
  return m;
}

}  // namespace dpdisp
