#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "dpdisp/config.hpp"

namespace dpdisp::cli {

namespace fs = std::filesystem;

/// Stage defaults shared by every subcommand, read from the global --config file.
struct Settings {
  SimConfig sim;
  MatchConfig match;
  CompletionConfig completion;
  RefineConfig refine;
  CameraSampler sampler;
};

/// Accepts {"sim", "match", "completion", "refine", "camera_sampler"}; every section is optional.
Settings load_settings(const std::optional<fs::path>& path);

struct Globals {
  std::uint64_t seed = 0;
  bool seed_given = false;
  int threads = 0;
  std::optional<fs::path> config;
};

struct SimulateArgs {
  std::optional<fs::path> image;
  std::optional<fs::path> depth;
  std::optional<std::string> scene;
  int width = 192;
  int height = 192;
  fs::path camera;
  std::optional<double> pixel_pitch;
  std::optional<double> noise_sigma;
  fs::path out_left;
  fs::path out_right;
  std::optional<fs::path> out_guide;
  std::optional<fs::path> out_depth;
};

struct MatchArgs {
  fs::path left;
  fs::path right;
  std::optional<fs::path> config;
  fs::path out_disparity;
  std::optional<fs::path> out_mask;
};

struct CompleteArgs {
  fs::path sparse;
  fs::path guide;
  std::optional<fs::path> config;
  fs::path out_dense;
  fs::path out_conf;
};

struct RefineArgs {
  fs::path dense;
  fs::path conf;
  fs::path guide;
  std::optional<fs::path> config;
  fs::path out;
  std::optional<fs::path> out_prefiltered;
  std::optional<fs::path> out_confidence;
};

struct EvalArgs {
  fs::path est;
  fs::path gt;
  std::string gt_kind = "inverse-depth";
  std::optional<std::string> crop;
  std::optional<fs::path> out;
  std::optional<fs::path> csv;
};

struct FitArgs {
  fs::path sweep_config;
  fs::path out_model;
  std::optional<fs::path> out_records;
};

struct DatagenArgs {
  fs::path manifest;
  std::optional<fs::path> model;
  int count = 1;
  fs::path out_dir;
};

struct ToyArgs {
  fs::path out_dir;
  std::optional<double> target_disparity;
  std::optional<double> noise_sigma;
};

struct PipelineArgs {
  fs::path config;
  std::optional<fs::path> out_dir;
};

int run_simulate(const Globals& g, const SimulateArgs& a);
int run_match(const Globals& g, const MatchArgs& a);
int run_complete(const Globals& g, const CompleteArgs& a);
int run_refine(const Globals& g, const RefineArgs& a);
int run_eval(const Globals& g, const EvalArgs& a);
int run_fit_error_model(const Globals& g, const FitArgs& a);
int run_datagen(const Globals& g, const DatagenArgs& a);
int run_toy_experiment(const Globals& g, const ToyArgs& a);
int run_pipeline_command(const Globals& g, const PipelineArgs& a);

}  // namespace dpdisp::cli
