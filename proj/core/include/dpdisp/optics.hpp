#pragma once

#include <cstdint>

#include "dpdisp/types.hpp"

namespace dpdisp {

/// Half-shaded defocus kernels for the two dual-pixel views.
///
/// Each kernel is a disc of the circle-of-confusion radius with a linear
/// horizontal ramp, weight ~ max(0, +-x / r). The left kernel is the mirror
/// image of the right one, and both flip when the depth crosses the focal
/// plane. Radii below half a pixel give 1x1 delta kernels.
struct DPPsfPair {
  double radius = 0.0;  ///< pixels, signed: positive behind the focal plane
  GridD left;
  GridD right;

  int support() const { return left.width(); }
};

inline constexpr double kDefaultPixelPitch = 4e-6;
inline constexpr double kDefaultMaxPsfRadius = 64.0;

/// Signed circle-of-confusion radius in pixels: L f / (1 - f/z_f) (1/z_f - 1/z) / (2 pitch).
double blur_radius_px(double z, const CameraParams& cam, double pixel_pitch);

/// Throws SimulationError if |radius| exceeds max_radius.
DPPsfPair make_psf_pair(double z, const CameraParams& cam, double pixel_pitch = kDefaultPixelPitch,
                        double max_radius = kDefaultMaxPsfRadius);

/// Intensity-weighted horizontal centroid of a kernel, relative to its center.
double kernel_centroid_x(const GridD& kernel);

/// Template matching on ramp-shaded views reads this much more shift than the
/// kernel centroid separation (measured on random-dot charts, |r| = 1..13 px).
inline constexpr double kMatchingGain = 1.08;

/// The alpha for which disparity_from_depth predicts what template matching
/// recovers from the simulated views at this pixel pitch: the kernel centroid
/// separation (3 pi / 8 radius) times kMatchingGain.
double calibrated_alpha(double pixel_pitch = kDefaultPixelPitch);

struct SimConfig {
  double pixel_pitch = kDefaultPixelPitch;
  double noise_sigma = 0.0;  ///< additive Gaussian read noise after normalization
  std::uint64_t seed = 0;
  int layers = 16;
  double max_radius = kDefaultMaxPsfRadius;

  void validate() const;
};

/// Layered dual-pixel rendering. Depth is split into `layers` bins uniform in
/// inverse depth; each bin is blurred with the PSF pair at the bin's mean
/// inverse depth and composited back to front. Blur scatters energy with
/// reflection at the borders, so a single-layer scene conserves energy exactly.
DPImagePair simulate_dp(const Image& image, const DepthMap& depth, const CameraParams& cam,
                        const SimConfig& cfg = {});

/// Random anti-aliased dots of radius 1 px. `density` is the expected fraction
/// of bright pixels; `x_offset` shifts every dot horizontally (stereo pairs).
GridD render_random_dot_chart(int width, int height, double density, std::uint64_t seed,
                              double x_offset = 0.0);

}  // namespace dpdisp
