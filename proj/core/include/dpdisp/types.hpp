#pragma once

#include <cmath>
#include <limits>
#include <optional>

#include "dpdisp/grid.hpp"

namespace dpdisp {

/// Thin-lens camera description. Lengths in meters.
///
/// `alpha` converts the signed blur-disc diameter on the sensor (meters)
/// into disparity in pixels; it is a calibration constant.
struct CameraParams {
  double focal_length = 0.0;    ///< f
  double f_number = 0.0;        ///< F = f / L
  double aperture = 0.0;        ///< L
  double focus_distance = 0.0;  ///< z_f
  double alpha = 1.0;

  /// Builds a camera from f-number; aperture is derived as f / F. Throws ConfigError.
  static CameraParams from_f_number(double focal_length, double f_number, double focus_distance,
                                    double alpha = 1.0);

  /// Throws ConfigError when any invariant is violated.
  void validate() const;

  /// L f / (1 - f / z_f): the depth-independent factor of the blur-disc diameter.
  double blur_scale() const { return aperture * focal_length / (1.0 - focal_length / focus_distance); }

  friend bool operator==(const CameraParams&, const CameraParams&) = default;
};

inline constexpr double kInvalidValue = std::numeric_limits<double>::quiet_NaN();

/// Value grid plus an authoritative validity mask. Invalid entries hold NaN.
template <typename Tag>
struct MaskedMap {
  GridD values;
  Mask valid;

  MaskedMap() = default;
  MaskedMap(int width, int height)
      : values(width, height, kInvalidValue), valid(width, height, 0) {}

  /// All pixels valid.
  static MaskedMap dense(GridD v) {
    MaskedMap m;
    m.valid = Mask(v.width(), v.height(), 1);
    m.values = std::move(v);
    return m;
  }

  int width() const { return values.width(); }
  int height() const { return values.height(); }

  bool is_valid(int x, int y) const { return valid(x, y) != 0; }
  void set(int x, int y, double v) {
    values(x, y) = v;
    valid(x, y) = 1;
  }
  void invalidate(int x, int y) {
    values(x, y) = kInvalidValue;
    valid(x, y) = 0;
  }

  std::size_t count_valid() const {
    std::size_t n = 0;
    for (auto v : valid.values()) n += v != 0;
    return n;
  }

  friend bool operator==(const MaskedMap& a, const MaskedMap& b) {
    if (a.valid != b.valid) return false;
    for (std::size_t i = 0; i < a.values.size(); ++i) {
      if (a.valid[i] && a.values[i] != b.values[i]) return false;
    }
    return true;
  }
};

struct DepthTag {};
struct DisparityTag {};

/// Metric depth z in meters; every valid value is positive and finite.
using DepthMap = MaskedMap<DepthTag>;
/// Signed disparity in pixels. Far-side (z > z_f) disparity is positive.
using DisparityMap = MaskedMap<DisparityTag>;

/// Per-pixel confidence, clamped to [0,1].
struct ConfidenceMap {
  GridD values;

  ConfidenceMap() = default;
  ConfidenceMap(int width, int height, double fill = 0.0) : values(width, height, fill) {}
  explicit ConfidenceMap(GridD v);

  int width() const { return values.width(); }
  int height() const { return values.height(); }
  double operator()(int x, int y) const { return values(x, y); }

  static ConfidenceMap from_mask(const Mask& m);
  /// Entries >= threshold become 1, others 0.
  ConfidenceMap binarized(double threshold) const;
  Mask to_mask(double threshold = 0.5) const;

  friend bool operator==(const ConfidenceMap&, const ConfidenceMap&) = default;
};

/// Left/right dual-pixel views plus the guide the views were rendered from.
struct DPImagePair {
  GridD left;
  GridD right;
  std::optional<Image> guide;

  int width() const { return left.width(); }
  int height() const { return left.height(); }
  /// Guide if present, otherwise the left view.
  Image guide_or_left() const { return guide ? *guide : Image(left); }
};

}  // namespace dpdisp
