#include "dpdisp/config.hpp"

#include <algorithm>
#include <initializer_list>
#include <string>
#include <string_view>

#include "dpdisp/error.hpp"

namespace dpdisp {
using nlohmann::json;

namespace {

void require_object(const json& j, std::string_view what, std::initializer_list<std::string_view> keys) {
  if (!j.is_object()) throw ConfigError(std::string(what) + ": expected a JSON object");
  for (const auto& [k, _] : j.items()) {
    if (std::find(keys.begin(), keys.end(), k) == keys.end()) {
      throw ConfigError(std::string(what) + ": unknown key '" + k + "'");
    }
  }
}

template <typename T>
void read_opt(const json& j, const char* key, T& out, std::string_view what) {
  auto it = j.find(key);
  if (it == j.end()) return;
  try {
    out = it->get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string(what) + "." + key + ": " + e.what());
  }
}

}  // namespace

void to_json(json& j, const MatchConfig& c) {
  j = json{{"window", c.window},
           {"search_range", c.search_range},
           {"subpixel", c.subpixel},
           {"lowpass_sigma", c.lowpass_sigma},
           {"edge_threshold", c.edge_threshold}};
}

void from_json(const json& j, MatchConfig& c) {
  require_object(j, "match", {"window", "search_range", "subpixel", "lowpass_sigma", "edge_threshold"});
  read_opt(j, "window", c.window, "match");
  read_opt(j, "search_range", c.search_range, "match");
  read_opt(j, "subpixel", c.subpixel, "match");
  read_opt(j, "lowpass_sigma", c.lowpass_sigma, "match");
  read_opt(j, "edge_threshold", c.edge_threshold, "match");
  c.validate();
}

void to_json(json& j, const SimConfig& c) {
  j = json{{"pixel_pitch_m", c.pixel_pitch},
           {"noise_sigma", c.noise_sigma},
           {"seed", c.seed},
           {"layers", c.layers},
           {"max_radius_px", c.max_radius}};
}

void from_json(const json& j, SimConfig& c) {
  require_object(j, "sim", {"pixel_pitch_m", "noise_sigma", "seed", "layers", "max_radius_px"});
  read_opt(j, "pixel_pitch_m", c.pixel_pitch, "sim");
  read_opt(j, "noise_sigma", c.noise_sigma, "sim");
  read_opt(j, "seed", c.seed, "sim");
  read_opt(j, "layers", c.layers, "sim");
  read_opt(j, "max_radius_px", c.max_radius, "sim");
  c.validate();
}

void to_json(json& j, const FgsConfig& c) {
  j = json{{"lambda", c.lambda},
           {"sigma_color", c.sigma_color},
           {"iterations", c.iterations},
           {"lambda_schedule", c.schedule == LambdaSchedule::kGeometric ? "geometric" : "constant"}};
}

void from_json(const json& j, FgsConfig& c) {
  require_object(j, "fgs", {"lambda", "sigma_color", "iterations", "lambda_schedule"});
  read_opt(j, "lambda", c.lambda, "fgs");
  read_opt(j, "sigma_color", c.sigma_color, "fgs");
  read_opt(j, "iterations", c.iterations, "fgs");
  std::string schedule = c.schedule == LambdaSchedule::kGeometric ? "geometric" : "constant";
  read_opt(j, "lambda_schedule", schedule, "fgs");
  if (schedule == "geometric") {
    c.schedule = LambdaSchedule::kGeometric;
  } else if (schedule == "constant") {
    c.schedule = LambdaSchedule::kConstant;
  } else {
    throw ConfigError("fgs.lambda_schedule: expected 'geometric' or 'constant'");
  }
  c.validate();
}

void to_json(json& j, const CompletionConfig& c) { j = json{{"fgs", c.fgs}, {"tau", c.tau}}; }

void from_json(const json& j, CompletionConfig& c) {
  require_object(j, "completion", {"fgs", "tau"});
  read_opt(j, "fgs", c.fgs, "completion");
  read_opt(j, "tau", c.tau, "completion");
  if (!(c.tau > 0.0)) throw ConfigError("completion.tau must be > 0");
}

void to_json(json& j, const RefineConfig& c) {
  j = json{{"fgs", c.fgs},
           {"wmf_window", c.wmf_window},
           {"wmf_sigma_color", c.wmf_sigma_color},
           {"edge_dilate_radius", c.edge.dilate_radius},
           {"edge_gradient_scale", c.edge.gradient_scale},
           {"binarize_threshold", c.binarize_threshold}};
}

void from_json(const json& j, RefineConfig& c) {
  require_object(j, "refine",
                 {"fgs", "wmf_window", "wmf_sigma_color", "edge_dilate_radius", "edge_gradient_scale",
                  "binarize_threshold"});
  read_opt(j, "fgs", c.fgs, "refine");
  read_opt(j, "wmf_window", c.wmf_window, "refine");
  read_opt(j, "wmf_sigma_color", c.wmf_sigma_color, "refine");
  read_opt(j, "edge_dilate_radius", c.edge.dilate_radius, "refine");
  read_opt(j, "edge_gradient_scale", c.edge.gradient_scale, "refine");
  read_opt(j, "binarize_threshold", c.binarize_threshold, "refine");
  c.validate();
}

void to_json(json& j, const ErrorModel& m) { j = json{{"c1", m.c1}, {"c2", m.c2}, {"c3", m.c3}}; }

void from_json(const json& j, ErrorModel& m) {
  require_object(j, "error model", {"c1", "c2", "c3", "residual_rms"});
  try {
    m.c1 = j.at("c1").get<double>();
    m.c2 = j.at("c2").get<double>();
    m.c3 = j.at("c3").get<double>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("error model: ") + e.what());
  }
  m.validate();
}

void to_json(json& j, const SweepConfig& c) {
  j = json{{"z", c.z},
           {"z_f", c.z_f},
           {"f_number", c.f_number},
           {"focal_length_m", c.focal_length},
           {"pixel_pitch_m", c.pixel_pitch},
           {"width", c.width},
           {"height", c.height},
           {"dot_density", c.dot_density},
           {"noise_sigma", c.noise_sigma},
           {"match", c.match}};
}

void from_json(const json& j, SweepConfig& c) {
  require_object(j, "sweep",
                 {"z", "z_f", "f_number", "focal_length_m", "pixel_pitch_m", "width", "height", "dot_density",
                  "noise_sigma", "match"});
  read_opt(j, "z", c.z, "sweep");
  read_opt(j, "z_f", c.z_f, "sweep");
  read_opt(j, "f_number", c.f_number, "sweep");
  read_opt(j, "focal_length_m", c.focal_length, "sweep");
  read_opt(j, "pixel_pitch_m", c.pixel_pitch, "sweep");
  read_opt(j, "width", c.width, "sweep");
  read_opt(j, "height", c.height, "sweep");
  read_opt(j, "dot_density", c.dot_density, "sweep");
  read_opt(j, "noise_sigma", c.noise_sigma, "sweep");
  read_opt(j, "match", c.match, "sweep");
  c.validate();
}

void to_json(json& j, const SweepRecord& r) {
  j = json{{"z", r.z},
           {"z_f", r.z_f},
           {"f_number", r.f_number},
           {"sigma_measured", r.sigma_measured},
           {"n_samples", r.n_samples}};
}

void to_json(json& j, const MetricReport& r) {
  j = json{{"ai1", r.ai1},
           {"ai2", r.ai2},
           {"spearman_one_minus_abs", r.spearman_one_minus_abs},
           {"beta0", r.beta0},
           {"beta1", r.beta1},
           {"n_pixels", r.n_pixels},
           {"degenerate", r.degenerate}};
}

void to_json(json& j, const CameraSampler& s) {
  j = json{{"z_f_min", s.z_f_min},         {"z_f_max", s.z_f_max},     {"f_numbers", s.f_numbers},
           {"focal_min_m", s.focal_min},   {"focal_max_m", s.focal_max}, {"pixel_pitch_m", s.pixel_pitch}};
}

void from_json(const json& j, CameraSampler& s) {
  require_object(j, "camera sampler",
                 {"z_f_min", "z_f_max", "f_numbers", "focal_min_m", "focal_max_m", "pixel_pitch_m"});
  read_opt(j, "z_f_min", s.z_f_min, "camera sampler");
  read_opt(j, "z_f_max", s.z_f_max, "camera sampler");
  read_opt(j, "f_numbers", s.f_numbers, "camera sampler");
  read_opt(j, "focal_min_m", s.focal_min, "camera sampler");
  read_opt(j, "focal_max_m", s.focal_max, "camera sampler");
  read_opt(j, "pixel_pitch_m", s.pixel_pitch, "camera sampler");
  if (!(s.z_f_min > 0.0) || !(s.z_f_max >= s.z_f_min) || s.f_numbers.empty() || !(s.focal_min > 0.0) ||
      !(s.focal_max >= s.focal_min) || !(s.pixel_pitch > 0.0)) {
    throw ConfigError("camera sampler: invalid ranges");
  }
}

}  // namespace dpdisp
