#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "dpdisp/errmodel.hpp"
#include "dpdisp/eval.hpp"
#include "dpdisp/matching.hpp"
#include "dpdisp/optics.hpp"
#include "dpdisp/refine.hpp"
#include "dpdisp/scenes.hpp"

namespace dpdisp {

/// Synthetic input used instead of image/depth files.
struct SceneSpec {
  SceneKind kind = SceneKind::kTwoPlane;
  SceneOptions options;
};

struct PipelineConfig {
  std::filesystem::path camera_path;
  CameraParams camera;
  MatchConfig match;
  CompletionConfig completion;
  RefineConfig refine;
  SimConfig sim;
  std::optional<std::filesystem::path> error_model_path;
  std::optional<ErrorModel> error_model;
  std::optional<std::filesystem::path> image_path;
  std::optional<std::filesystem::path> depth_path;
  std::optional<SceneSpec> scene;
  std::filesystem::path output_dir;
  std::uint64_t seed = 0;
  nlohmann::json source;  ///< the configuration as loaded, for the manifest
};

/// Parses and validates a pipeline JSON file. Relative paths resolve against
/// the file's directory. Every referenced file must exist and parse
/// (ConfigError / IoError otherwise) before any stage runs.
PipelineConfig load_pipeline_config(const std::filesystem::path& path);
PipelineConfig pipeline_config_from_json(const nlohmann::json& j,
                                         const std::filesystem::path& base_dir);

struct PipelineResult {
  std::filesystem::path run_dir;
  MetricReport unrefined;
  MetricReport refined;
  nlohmann::json manifest;
};

/// simulate -> match -> complete -> refine -> eval. Every intermediate is
/// written to output_dir along with manifest.json. Stage failures surface as
/// StageError.
PipelineResult run_pipeline(const PipelineConfig& cfg);

/// FNV-1a 64 of the canonical (sorted-key, compact) JSON dump, as 16 hex digits.
std::string config_hash(const nlohmann::json& j);

std::string library_version();

struct ToyExperimentConfig {
  int width = 256;
  int height = 256;
  double dot_density = 0.25;
  double target_disparity = 12.0;  ///< ground-truth disparity of the plane, pixels
  double focal_length = 0.025;
  double f_number = 2.0;
  double focus_distance = 2.0;
  double pixel_pitch = kDefaultPixelPitch;
  double noise_sigma = 0.02;
  MatchConfig match;
  double histogram_min = -10.0;
  double histogram_max = 10.0;
  double histogram_bin = 0.25;
};

struct ToyBranch {
  std::vector<double> errors;  ///< matched - ground truth, masked pixels
  double within_1px = 0.0;
  double laplace_loglik = 0.0;   ///< mean per-sample, ML fit
  double gaussian_loglik = 0.0;  ///< mean per-sample, ML fit
  std::vector<std::size_t> histogram;
};

struct ToyResult {
  double gt_disparity = 0.0;
  double depth = 0.0;
  ToyBranch stereo;
  ToyBranch dp;
  std::vector<double> bin_edges;
};

/// Random-dot plane matched as a stereo pair (pure shift) and as a simulated
/// dual-pixel pair with the same ground-truth disparity.
ToyResult toy_experiment(std::uint64_t seed, const ToyExperimentConfig& cfg = {});

/// histogram.csv (bin_lo,bin_hi,stereo,dp) and summary.json.
void write_toy_outputs(const ToyResult& result, const std::filesystem::path& out_dir);

/// Maximum-likelihood mean log-likelihoods of the samples.
double laplace_mean_loglik(std::span<const double> x);
double gaussian_mean_loglik(std::span<const double> x);

}  // namespace dpdisp
