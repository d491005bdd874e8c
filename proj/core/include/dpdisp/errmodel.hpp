#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "dpdisp/matching.hpp"
#include "dpdisp/optics.hpp"
#include "dpdisp/random.hpp"
#include "dpdisp/types.hpp"

namespace dpdisp {

/// Template-matching error model: sigma_d = c1 * (c2 z / (F z_f)) ^ (z / c3).
struct ErrorModel {
  double c1 = 6.93;
  double c2 = 0.48;
  double c3 = 1.39;

  /// Throws ConfigError unless all constants are positive and finite.
  void validate() const;

  friend bool operator==(const ErrorModel&, const ErrorModel&) = default;
};

/// Constants reported for the reference simulator fit.
inline constexpr ErrorModel kReferenceErrorModel{6.93, 0.48, 1.39};

/// Standard deviation (pixels) of the matching error at depth z, focus z_f, f-number F.
double sigma_d(const ErrorModel& model, double z, double z_f, double f_number);

struct SweepRecord {
  double z = 0.0;
  double z_f = 0.0;
  double f_number = 0.0;
  double sigma_measured = 0.0;
  int n_samples = 0;
};

struct SweepConfig {
  std::vector<double> z;
  std::vector<double> z_f;
  std::vector<double> f_number;
  double focal_length = 0.025;
  double pixel_pitch = kDefaultPixelPitch;
  int width = 192;
  int height = 192;
  double dot_density = 0.25;
  double noise_sigma = 0.02;
  MatchConfig match;

  void validate() const;
};

/// Simulates a random-dot plane for every (z, z_f, F) combination, matches
/// the views and records the spread of (matched - thin-lens disparity) over the
/// edge mask. Point i uses seed derive_seed(seed, i).
std::vector<SweepRecord> run_error_sweep(const SweepConfig& cfg, std::uint64_t seed);

/// One sweep point; exposed for tests and the toy experiment.
SweepRecord measure_sweep_point(double z, double z_f, double f_number, const SweepConfig& cfg,
                                std::uint64_t seed);

struct FitOptions {
  int max_iterations = 500;
  double tolerance = 1e-12;
};

struct FitResult {
  ErrorModel model;
  double residual_rms = 0.0;  ///< RMS of log-sigma residuals
  int iterations = 0;
};

/// Levenberg-Marquardt in log-sigma space with c_i = exp(theta_i).
/// Needs >= 10 usable records spanning >= 3 distinct depths (FitError otherwise).
FitResult fit_error_model(std::span<const SweepRecord> records, const FitOptions& opts = {});

/// d plus zero-mean Laplace noise whose standard deviation is sigma (scale sigma / sqrt 2).
double sample_disparity(double d, double sigma, Rng& rng);

/// Random camera draws for training-data generation.
struct CameraSampler {
  double z_f_min = 0.3;
  double z_f_max = 10.0;
  std::vector<double> f_numbers{1.4, 2.0, 2.8, 4.0};
  double focal_min = 0.024;
  double focal_max = 0.085;
  double pixel_pitch = kDefaultPixelPitch;

  /// z_f log-uniform, F uniform over the list, f uniform; alpha = calibrated_alpha(pitch).
  CameraParams sample(Rng& rng) const;
};

struct TrainingSample {
  DisparityMap sparse;
  DisparityMap pseudo_gt;
  Image guide;
  CameraParams camera;
};

/// Depth -> pseudo-GT disparity under a sampled camera, kept on the edge mask
/// of the RGB image and perturbed with Laplace noise of sigma_d per pixel.
TrainingSample generate_training_sample(const Image& rgb, const DepthMap& depth,
                                        const CameraSampler& sampler, const ErrorModel& model,
                                        const MatchConfig& match_cfg, Rng& rng);

}  // namespace dpdisp
