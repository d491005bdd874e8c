#include "dpdisp/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <random>
#include <string>

#include "dpdisp/config.hpp"
#include "dpdisp/conversion.hpp"
#include "dpdisp/error.hpp"
#include "dpdisp/io.hpp"
#include "dpdisp/random.hpp"

#ifndef DPDISP_VERSION
#define DPDISP_VERSION "0.0.0"
#endif

namespace dpdisp {
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

const std::initializer_list<std::string_view> kPipelineKeys = {
    "camera", "scene", "image", "depth", "error_model", "match", "completion", "refine", "sim", "output_dir", "seed"};

fs::path resolve(const fs::path& base, const std::string& p) {
  const fs::path path(p);
  return path.is_absolute() ? path : base / path;
}

fs::path require_file(const json& j, const char* key, const fs::path& base) {
  if (!j.is_string()) throw ConfigError(std::string("pipeline.") + key + ": expected a path string");
  const auto path = resolve(base, j.get<std::string>());
  if (!fs::is_regular_file(path)) throw ConfigError(std::string("pipeline.") + key + ": file not found: " + path.string());
  return path;
}

template <typename T>
T parse_section(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end()) return T{};
  T out{};
  from_json(*it, out);
  return out;
}

json scene_to_json(const SceneSpec& s) {
  return json{{"kind", std::string(scene_kind_name(s.kind))},
              {"width", s.options.width},
              {"height", s.options.height},
              {"near_depth", s.options.near_depth},
              {"far_depth", s.options.far_depth},
              {"edge_column", s.options.edge_column}};
}

SceneSpec scene_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("pipeline.scene: expected an object");
  for (const auto& [k, _] : j.items()) {
    if (k != "kind" && k != "width" && k != "height" && k != "near_depth" && k != "far_depth" && k != "edge_column") {
      throw ConfigError("pipeline.scene: unknown key '" + k + "'");
    }
  }
  SceneSpec s;
  try {
    s.kind = scene_kind_from_name(j.value("kind", std::string("two-plane")));
    s.options.width = j.value("width", s.options.width);
    s.options.height = j.value("height", s.options.height);
    s.options.near_depth = j.value("near_depth", s.options.near_depth);
    s.options.far_depth = j.value("far_depth", s.options.far_depth);
    s.options.edge_column = j.value("edge_column", s.options.edge_column);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("pipeline.scene: ") + e.what());
  }
  return s;
}

// Runs one stage; library errors are rethrown as StageError naming the stage
// and the artifacts it was working on.
template <typename Fn>
auto run_stage(const std::string& name, const std::string& artifacts, Fn&& fn) {
  try {
    return fn();
  } catch (const StageError&) {
    throw;
  } catch (const fs::filesystem_error& e) {
    throw StageError(name, ErrorFamily::kIo, std::string(e.what()) + " (artifacts: " + artifacts + ")");
  } catch (const std::exception& e) {
    throw StageError(name, family_of(e), std::string(e.what()) + " (artifacts: " + artifacts + ")");
  }
}

void add_noise(GridD& g, double sigma, std::uint64_t seed) {
  if (sigma <= 0.0) return;
  Rng rng(seed);
  std::normal_distribution<double> noise(0.0, sigma);
  for (auto& x : g.values()) x = std::clamp(x + noise(rng), 0.0, 1.0);
}

ToyBranch measure_branch(const GridD& left, const GridD& right, double gt, const ToyExperimentConfig& cfg,
                         const std::vector<double>& edges) {
  auto mask = edge_mask(left, cfg.match);
  const int margin = cfg.match.window / 2;
  for (int y = 0; y < left.height(); ++y) {
    for (int x = 0; x < left.width(); ++x) {
      if (x < margin || y < margin || x >= left.width() - margin || y >= left.height() - margin) {
        mask.values(x, y) = 0.0;
      }
    }
  }
  const auto d = template_match(left, right, mask, cfg.match);
  ToyBranch b;
  for (std::size_t i = 0; i < d.values.size(); ++i) {
    if (d.valid[i]) b.errors.push_back(d.values[i] - gt);
  }
  if (b.errors.empty()) throw MatchError("toy experiment: no pixel passed the edge mask");
  std::size_t within = 0;
  for (double e : b.errors) within += std::abs(e) <= 1.0;
  b.within_1px = static_cast<double>(within) / static_cast<double>(b.errors.size());
  b.laplace_loglik = laplace_mean_loglik(b.errors);
  b.gaussian_loglik = gaussian_mean_loglik(b.errors);
  b.histogram.assign(edges.size() - 1, 0);
  for (double e : b.errors) {
    if (e < edges.front() || e >= edges.back()) continue;
    const auto k = std::min(static_cast<std::size_t>((e - edges.front()) / cfg.histogram_bin), b.histogram.size() - 1);
    ++b.histogram[k];
  }
  return b;
}

json branch_summary(const ToyBranch& b) {
  double mean = 0.0;
  for (double e : b.errors) mean += e;
  mean /= static_cast<double>(b.errors.size());
  double var = 0.0;
  for (double e : b.errors) var += (e - mean) * (e - mean);
  return json{{"n", b.errors.size()},
              {"within_1px", b.within_1px},
              {"mean_error", mean},
              {"std_error", std::sqrt(var / static_cast<double>(b.errors.size()))},
              {"laplace_loglik", b.laplace_loglik},
              {"gaussian_loglik", b.gaussian_loglik}};
}

}  // namespace

std::string library_version() { return DPDISP_VERSION; }

std::string config_hash(const json& j) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : j.dump()) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

PipelineConfig pipeline_config_from_json(const json& j, const fs::path& base_dir) {
  if (!j.is_object()) throw ConfigError("pipeline config: expected a JSON object");
  for (const auto& [k, _] : j.items()) {
    if (std::find(kPipelineKeys.begin(), kPipelineKeys.end(), k) == kPipelineKeys.end()) {
      throw ConfigError("pipeline config: unknown key '" + k + "'");
    }
  }
  PipelineConfig cfg;
  json resolved = json::object();

  if (!j.contains("camera")) throw ConfigError("pipeline config: 'camera' is required");
  if (j["camera"].is_object()) {
    cfg.camera = camera_from_json(j["camera"]);
  } else {
    cfg.camera_path = require_file(j["camera"], "camera", base_dir);
    cfg.camera = read_camera(cfg.camera_path);
  }
  resolved["camera"] = camera_to_json(cfg.camera);

  if (j.contains("error_model")) {
    const auto& em = j["error_model"];
    if (em.is_object()) {
      cfg.error_model = em.get<ErrorModel>();
    } else {
      cfg.error_model_path = require_file(em, "error_model", base_dir);
      cfg.error_model = read_json(*cfg.error_model_path).get<ErrorModel>();
    }
    resolved["error_model"] = *cfg.error_model;
  }

  const bool has_scene = j.contains("scene");
  const bool has_files = j.contains("image") || j.contains("depth");
  if (has_scene == has_files) throw ConfigError("pipeline config: give either 'scene' or both 'image' and 'depth'");
  if (has_scene) {
    cfg.scene = scene_from_json(j["scene"]);
    resolved["scene"] = scene_to_json(*cfg.scene);
  } else {
    if (!j.contains("image") || !j.contains("depth")) throw ConfigError("pipeline config: 'image' and 'depth' go together");
    cfg.image_path = require_file(j["image"], "image", base_dir);
    cfg.depth_path = require_file(j["depth"], "depth", base_dir);
    const auto img = read_image(*cfg.image_path);
    const auto depth = read_depth(*cfg.depth_path);
    if (img.width() != depth.width() || img.height() != depth.height()) {
      throw ConfigError("pipeline config: image and depth dimensions differ");
    }
    resolved["image"] = fs::absolute(*cfg.image_path).lexically_normal().string();
    resolved["depth"] = fs::absolute(*cfg.depth_path).lexically_normal().string();
  }

  try {
    cfg.seed = j.value("seed", std::uint64_t{0});
  } catch (const json::exception& e) {
    throw ConfigError(std::string("pipeline.seed: ") + e.what());
  }
  cfg.match = parse_section<MatchConfig>(j, "match");
  cfg.completion = parse_section<CompletionConfig>(j, "completion");
  cfg.refine = parse_section<RefineConfig>(j, "refine");
  cfg.sim = parse_section<SimConfig>(j, "sim");
  if (!(j.contains("sim") && j["sim"].contains("seed"))) cfg.sim.seed = derive_seed(cfg.seed, 1);
  cfg.output_dir = j.contains("output_dir") ? resolve(base_dir, j["output_dir"].get<std::string>()) : base_dir / "run";

  resolved["seed"] = cfg.seed;
  resolved["match"] = cfg.match;
  resolved["completion"] = cfg.completion;
  resolved["refine"] = cfg.refine;
  resolved["sim"] = cfg.sim;
  resolved["output_dir"] = cfg.output_dir.lexically_normal().string();
  cfg.source = resolved;
  return cfg;
}

PipelineConfig load_pipeline_config(const fs::path& path) {
  if (!fs::is_regular_file(path)) throw ConfigError("pipeline config not found: " + path.string());
  json j = read_json(path);
  // A run manifest carries its resolved configuration and can be replayed directly.
  if (j.is_object() && j.contains("config") && j.contains("config_hash")) j = j["config"];
  return pipeline_config_from_json(j, path.parent_path());
}

PipelineResult run_pipeline(const PipelineConfig& cfg) {
  const fs::path dir = cfg.output_dir;
  run_stage("setup", dir.string(), [&] {
    fs::create_directories(dir);
    return 0;
  });
  auto at = [&](const char* name) { return dir / name; };

  Scene scene = run_stage("load", "scene inputs", [&] {
    if (cfg.scene) return make_scene(cfg.scene->kind, cfg.scene->options, derive_seed(cfg.seed, 0));
    Scene s;
    s.name = cfg.image_path->stem().string();
    s.image = read_image(*cfg.image_path);
    s.depth = read_depth(*cfg.depth_path);
    return s;
  });

  const auto pair = run_stage("simulate", "left.pfm, right.pfm, guide.png", [&] {
    auto p = simulate_dp(scene.image, scene.depth, cfg.camera, cfg.sim);
    write_pfm(at("left.pfm"), Image(p.left));
    write_pfm(at("right.pfm"), Image(p.right));
    write_png8(at("guide.png"), scene.image);
    write_map(scene.depth, at("gt_depth.pfm"));
    return p;
  });
  const Image guide = pair.guide_or_left();

  const auto gt = run_stage("pseudo-gt", "gt_disparity.pfm", [&] {
    auto d = depth_to_disparity(scene.depth, cfg.camera);
    write_map(d, at("gt_disparity.pfm"));
    return d;
  });

  const auto sparse = run_stage("match", "mask.png, sparse.pfm", [&] {
    const auto mask = edge_mask(pair.left, cfg.match);
    write_png8(at("mask.png"), mask.to_mask());
    auto d = template_match(pair, mask, cfg.match);
    write_map(d, at("sparse.pfm"));
    return d;
  });

  const auto completion = run_stage("complete", "dense.pfm, dense_confidence.pfm", [&] {
    auto c = complete_sparse(sparse, guide, cfg.completion);
    write_map(c.dense, at("dense.pfm"));
    write_confidence(c.confidence, at("dense_confidence.pfm"));
    return c;
  });

  const auto stages = run_stage("refine", "prefiltered.pfm, refine_confidence.pfm, refined.pfm", [&] {
    auto s = refine_pipeline_stages(completion.dense, completion.confidence, guide, cfg.refine);
    write_map(s.prefiltered, at("prefiltered.pfm"));
    write_confidence(s.confidence, at("refine_confidence.pfm"));
    write_map(s.refined, at("refined.pfm"));
    return s;
  });

  PipelineResult result;
  result.run_dir = dir;
  json metrics = run_stage("eval", "metrics.json", [&] {
    const auto ref = disparity_reference(gt);
    result.unrefined = evaluate(completion.dense, ref.values, ref.valid);
    result.refined = evaluate(stages.refined, ref.values, ref.valid);
    json m{{"unrefined", result.unrefined},
           {"refined", result.refined},
           {"dense_uncertainty_loss",
            uncertainty_loss(completion.dense, gt, uncertainty_from_confidence(completion.confidence))}};
    if (cfg.error_model) {
      GridD sigma(gt.width(), gt.height(), 1.0);
      for (std::size_t i = 0; i < sigma.size(); ++i) {
        const double s = sigma_d(*cfg.error_model, scene.depth.values[i], cfg.camera.focus_distance, cfg.camera.f_number);
        sigma[i] = std::max(s, 1e-6);
      }
      m["sparse_model_uncertainty_loss"] = uncertainty_loss(sparse, gt, sigma);
    }
    write_json(at("metrics.json"), m);
    return m;
  });

  result.manifest = json{{"library_version", library_version()},
                         {"config_hash", config_hash(cfg.source)},
                         {"config", cfg.source},
                         {"scene", scene.name},
                         {"artifacts",
                          {{"left", "left.pfm"},
                           {"right", "right.pfm"},
                           {"guide", "guide.png"},
                           {"gt_depth", "gt_depth.pfm"},
                           {"gt_disparity", "gt_disparity.pfm"},
                           {"mask", "mask.png"},
                           {"sparse", "sparse.pfm"},
                           {"dense", "dense.pfm"},
                           {"dense_confidence", "dense_confidence.pfm"},
                           {"prefiltered", "prefiltered.pfm"},
                           {"refine_confidence", "refine_confidence.pfm"},
                           {"refined", "refined.pfm"},
                           {"metrics", "metrics.json"}}},
                         {"metrics", metrics}};
  run_stage("manifest", "manifest.json", [&] {
    write_json(at("manifest.json"), result.manifest);
    return 0;
  });
  return result;
}

double laplace_mean_loglik(std::span<const double> x) {
  if (x.empty()) return 0.0;
  std::vector<double> s(x.begin(), x.end());
  std::sort(s.begin(), s.end());
  const std::size_t n = s.size();
  const double med = n % 2 ? s[n / 2] : 0.5 * (s[n / 2 - 1] + s[n / 2]);
  double b = 0.0;
  for (double v : s) b += std::abs(v - med);
  b = std::max(b / static_cast<double>(n), 1e-12);
  return -std::log(2.0 * b) - 1.0;
}

double gaussian_mean_loglik(std::span<const double> x) {
  if (x.empty()) return 0.0;
  const double n = static_cast<double>(x.size());
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= n;
  double var = 0.0;
  for (double v : x) var += (v - mean) * (v - mean);
  var = std::max(var / n, 1e-24);
  return -0.5 * std::log(2.0 * std::numbers::pi * var) - 0.5;
}

ToyResult toy_experiment(std::uint64_t seed, const ToyExperimentConfig& cfg) {
  cfg.match.validate();
  if (!(cfg.histogram_bin > 0.0) || !(cfg.histogram_max > cfg.histogram_min)) {
    throw ConfigError("toy experiment: invalid histogram range");
  }
  const auto cam = CameraParams::from_f_number(cfg.focal_length, cfg.f_number, cfg.focus_distance,
                                               calibrated_alpha(cfg.pixel_pitch));
  ToyResult r;
  r.gt_disparity = cfg.target_disparity;
  r.depth = depth_from_disparity(cfg.target_disparity, cam);
  if (!(r.depth > 0.0) || !std::isfinite(r.depth)) throw ConfigError("toy experiment: target disparity is unreachable");
  const int nbins = static_cast<int>(std::lround((cfg.histogram_max - cfg.histogram_min) / cfg.histogram_bin));
  for (int i = 0; i <= nbins; ++i) r.bin_edges.push_back(cfg.histogram_min + i * cfg.histogram_bin);

  const auto chart = render_random_dot_chart(cfg.width, cfg.height, cfg.dot_density, derive_seed(seed, 0));

  GridD sl = chart;
  GridD sr = render_random_dot_chart(cfg.width, cfg.height, cfg.dot_density, derive_seed(seed, 0), cfg.target_disparity);
  add_noise(sl, cfg.noise_sigma, derive_seed(seed, 2));
  add_noise(sr, cfg.noise_sigma, derive_seed(seed, 3));
  r.stereo = measure_branch(sl, sr, cfg.target_disparity, cfg, r.bin_edges);

  SimConfig sim;
  sim.pixel_pitch = cfg.pixel_pitch;
  sim.noise_sigma = cfg.noise_sigma;
  sim.seed = derive_seed(seed, 1);
  const auto pair = simulate_dp(Image(chart), DepthMap::dense(GridD(cfg.width, cfg.height, r.depth)), cam, sim);
  r.dp = measure_branch(pair.left, pair.right, cfg.target_disparity, cfg, r.bin_edges);
  return r;
}

void write_toy_outputs(const ToyResult& result, const fs::path& out_dir) {
  fs::create_directories(out_dir);
  std::ofstream csv(out_dir / "histogram.csv");
  if (!csv) throw IoError("cannot write " + (out_dir / "histogram.csv").string());
  csv << "bin_lo,bin_hi,stereo,dp\n";
  char line[128];
  for (std::size_t i = 0; i + 1 < result.bin_edges.size(); ++i) {
    std::snprintf(line, sizeof line, "%.6f,%.6f,%zu,%zu\n", result.bin_edges[i], result.bin_edges[i + 1],
                  result.stereo.histogram[i], result.dp.histogram[i]);
    csv << line;
  }
  if (!csv) throw IoError("failed writing histogram.csv");
  write_json(out_dir / "summary.json", json{{"gt_disparity", result.gt_disparity},
                                            {"depth_m", result.depth},
                                            {"stereo", branch_summary(result.stereo)},
                                            {"dp", branch_summary(result.dp)}});
}

}  // namespace dpdisp
