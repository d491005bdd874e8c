#include "commands.hpp"

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <vector>

#include <spdlog/spdlog.h>

#include "dpdisp/conversion.hpp"
#include "dpdisp/error.hpp"
#include "dpdisp/io.hpp"
#include "dpdisp/pipeline.hpp"
#include "dpdisp/random.hpp"

namespace dpdisp::cli {
using nlohmann::json;

namespace {

// Views are all-valid intensities in [0,1]; 65535 stays free for the sentinel.
constexpr Png16Quantization kViewQuantization{65534.0, 0.0, 65535};

template <typename T>
T section(const json& j, const char* key, T fallback) {
  if (j.contains(key)) return j[key].get<T>();
  return fallback;
}

void require_file(const fs::path& p, const char* what) {
  if (!fs::is_regular_file(p)) throw IoError(std::string(what) + " not found: " + p.string());
}

template <typename T>
T override_from(const std::optional<fs::path>& path, T base) {
  if (!path) return base;
  require_file(*path, "config");
  // Partial files keep the fields already set in `base`.
  json merged = base;
  merged.merge_patch(read_json(*path));
  return merged.get<T>();
}

void ensure_parent(const fs::path& p) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
}

void write_view(const fs::path& path, const GridD& view) {
  ensure_parent(path);
  if (map_format_from_path(path) == MapFormat::kPfm) {
    write_pfm(path, Image(view));
  } else {
    write_map_data(path, MapFormat::kPng16, view, Mask(view.width(), view.height(), 1), kViewQuantization);
  }
}

GridD read_view(const fs::path& path) {
  require_file(path, "view");
  auto sidecar = path;
  sidecar += ".json";
  if (map_format_from_path(path) == MapFormat::kPng16 && fs::exists(sidecar)) {
    return read_map_data(path, MapFormat::kPng16).values;
  }
  return read_image(path).gray();
}

CropRect parse_crop(const std::string& s) {
  CropRect r;
  char c1 = 0, c2 = 0, c3 = 0;
  std::istringstream in(s);
  if (!(in >> r.x >> c1 >> r.y >> c2 >> r.width >> c3 >> r.height) || c1 != ',' || c2 != ',' || c3 != ',' ||
      !in.eof()) {
    throw ConfigError("--crop expects x,y,width,height, got '" + s + "'");
  }
  return r;
}

std::vector<std::pair<fs::path, fs::path>> read_rgbd_manifest(const fs::path& path) {
  require_file(path, "manifest");
  std::ifstream in(path);
  std::vector<std::pair<fs::path, fs::path>> pairs;
  const auto base = path.parent_path();
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw ConfigError(path.string() + ":" + std::to_string(lineno) + ": expected rgb,depth");
    fs::path rgb = line.substr(0, comma);
    fs::path depth = line.substr(comma + 1);
    if (lineno == 1 && rgb == "rgb" && depth == "depth") continue;
    if (rgb.is_relative()) rgb = base / rgb;
    if (depth.is_relative()) depth = base / depth;
    require_file(rgb, "rgb image");
    require_file(depth, "depth map");
    pairs.emplace_back(rgb, depth);
  }
  if (pairs.empty()) throw ConfigError(path.string() + ": no rgb,depth rows");
  return pairs;
}

std::string sample_name(int i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "sample_%05d", i);
  return buf;
}

}  // namespace

Settings load_settings(const std::optional<fs::path>& path) {
  Settings s;
  if (!path) return s;
  require_file(*path, "config");
  const json j = read_json(*path);
  if (!j.is_object()) throw ConfigError(path->string() + ": expected a JSON object");
  for (const auto& [k, _] : j.items()) {
    if (k != "sim" && k != "match" && k != "completion" && k != "refine" && k != "camera_sampler") {
      throw ConfigError(path->string() + ": unknown section '" + k + "'");
    }
  }
  s.sim = section(j, "sim", s.sim);
  s.match = section(j, "match", s.match);
  s.completion = section(j, "completion", s.completion);
  s.refine = section(j, "refine", s.refine);
  s.sampler = section(j, "camera_sampler", s.sampler);
  return s;
}

int run_simulate(const Globals& g, const SimulateArgs& a) {
  require_file(a.camera, "camera file");
  const CameraParams cam = read_camera(a.camera);
  Settings s = load_settings(g.config);
  if (a.pixel_pitch) s.sim.pixel_pitch = *a.pixel_pitch;
  if (a.noise_sigma) s.sim.noise_sigma = *a.noise_sigma;
  s.sim.seed = derive_seed(g.seed, 1);
  s.sim.validate();

  Image image;
  DepthMap depth;
  if (a.scene) {
    if (a.image || a.depth) throw ConfigError("--scene excludes --image/--depth");
    SceneOptions opts;
    opts.width = a.width;
    opts.height = a.height;
    auto scene = make_scene(scene_kind_from_name(*a.scene), opts, derive_seed(g.seed, 0));
    image = std::move(scene.image);
    depth = std::move(scene.depth);
  } else {
    if (!a.image || !a.depth) throw ConfigError("simulate needs --image and --depth, or --scene");
    require_file(*a.image, "image");
    require_file(*a.depth, "depth map");
    image = read_image(*a.image);
    depth = read_depth(*a.depth);
  }

  spdlog::info("simulate: {}x{} image, {} layers", image.width(), image.height(), s.sim.layers);
  const auto pair = simulate_dp(image, depth, cam, s.sim);
  write_view(a.out_left, pair.left);
  write_view(a.out_right, pair.right);
  if (a.out_guide) {
    ensure_parent(*a.out_guide);
    write_png8(*a.out_guide, image);
  }
  if (a.out_depth) {
    ensure_parent(*a.out_depth);
    write_map(depth, *a.out_depth);
  }
  return 0;
}

int run_match(const Globals& g, const MatchArgs& a) {
  const MatchConfig cfg = override_from(a.config, load_settings(g.config).match);
  const GridD left = read_view(a.left);
  const GridD right = read_view(a.right);
  const auto mask = edge_mask(left, cfg);
  const auto d = template_match(left, right, mask, cfg);
  spdlog::info("match: {} of {} pixels matched", d.count_valid(), d.values.size());
  ensure_parent(a.out_disparity);
  write_map(d, a.out_disparity);
  if (a.out_mask) {
    ensure_parent(*a.out_mask);
    write_png8(*a.out_mask, mask.to_mask());
  }
  return 0;
}

int run_complete(const Globals& g, const CompleteArgs& a) {
  const CompletionConfig cfg = override_from(a.config, load_settings(g.config).completion);
  require_file(a.sparse, "sparse disparity");
  require_file(a.guide, "guide");
  const auto sparse = read_disparity(a.sparse);
  const auto guide = read_image(a.guide);
  const auto c = complete_sparse(sparse, guide, cfg);
  ensure_parent(a.out_dense);
  ensure_parent(a.out_conf);
  write_map(c.dense, a.out_dense);
  write_confidence(c.confidence, a.out_conf);
  return 0;
}

int run_refine(const Globals& g, const RefineArgs& a) {
  const RefineConfig cfg = override_from(a.config, load_settings(g.config).refine);
  require_file(a.dense, "dense disparity");
  require_file(a.conf, "confidence");
  require_file(a.guide, "guide");
  const auto dense = read_disparity(a.dense);
  const auto conf = read_confidence(a.conf);
  const auto guide = read_image(a.guide);
  const auto st = refine_pipeline_stages(dense, conf, guide, cfg);
  ensure_parent(a.out);
  write_map(st.refined, a.out);
  if (a.out_prefiltered) {
    ensure_parent(*a.out_prefiltered);
    write_map(st.prefiltered, *a.out_prefiltered);
  }
  if (a.out_confidence) {
    ensure_parent(*a.out_confidence);
    write_confidence(st.confidence, *a.out_confidence);
  }
  return 0;
}

int run_eval(const Globals&, const EvalArgs& a) {
  require_file(a.est, "estimate");
  require_file(a.gt, "ground truth");
  const auto est = read_disparity(a.est);
  Reference ref;
  if (a.gt_kind == "inverse-depth") {
    auto m = read_map_data(a.gt, map_format_from_path(a.gt));
    ref = {std::move(m.values), std::move(m.valid)};
  } else if (a.gt_kind == "depth") {
    ref = inverse_depth_reference(read_depth(a.gt));
  } else if (a.gt_kind == "disparity") {
    ref = disparity_reference(read_disparity(a.gt));
  } else {
    throw ConfigError("--gt-kind must be inverse-depth, depth or disparity");
  }
  std::optional<CropRect> crop;
  if (a.crop) crop = parse_crop(*a.crop);

  const MetricReport r = evaluate(est, ref.values, ref.valid, crop);
  const json j = r;
  if (a.out) {
    ensure_parent(*a.out);
    write_json(*a.out, j);
  } else {
    std::cout << j.dump(2) << '\n';
  }
  if (a.csv) {
    ensure_parent(*a.csv);
    const bool fresh = !fs::exists(*a.csv) || fs::file_size(*a.csv) == 0;
    std::ofstream out(*a.csv, std::ios::app);
    if (!out) throw IoError("cannot append to " + a.csv->string());
    if (fresh) out << "est,gt,gt_kind,ai1,ai2,spearman_one_minus_abs,beta0,beta1,n_pixels,degenerate\n";
    char buf[256];
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g,%zu,%d", r.ai1, r.ai2, r.spearman_one_minus_abs,
                  r.beta0, r.beta1, r.n_pixels, r.degenerate ? 1 : 0);
    out << a.est.string() << ',' << a.gt.string() << ',' << a.gt_kind << ',' << buf << '\n';
  }
  return 0;
}

int run_fit_error_model(const Globals& g, const FitArgs& a) {
  require_file(a.sweep_config, "sweep config");
  const SweepConfig sweep = read_json(a.sweep_config).get<SweepConfig>();
  const auto records = run_error_sweep(sweep, g.seed);
  spdlog::info("fit-error-model: {} sweep records", records.size());
  if (a.out_records) {
    ensure_parent(*a.out_records);
    std::ofstream out(*a.out_records);
    if (!out) throw IoError("cannot write " + a.out_records->string());
    out << "z,z_f,f_number,sigma_measured,n_samples\n";
    char buf[160];
    for (const auto& r : records) {
      std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%d\n", r.z, r.z_f, r.f_number, r.sigma_measured,
                    r.n_samples);
      out << buf;
    }
  }
  const auto fit = fit_error_model(records);
  json j = fit.model;
  j["residual_rms"] = fit.residual_rms;
  ensure_parent(a.out_model);
  write_json(a.out_model, j);
  return 0;
}

int run_datagen(const Globals& g, const DatagenArgs& a) {
  if (a.count < 1) throw ConfigError("--count must be >= 1");
  const auto pairs = read_rgbd_manifest(a.manifest);
  ErrorModel model = kReferenceErrorModel;
  if (a.model) {
    require_file(*a.model, "error model");
    model = read_json(*a.model).get<ErrorModel>();
  }
  const Settings s = load_settings(g.config);
  fs::create_directories(a.out_dir);

  std::ofstream index(a.out_dir / "samples.csv");
  if (!index) throw IoError("cannot write " + (a.out_dir / "samples.csv").string());
  index << "name,rgb,depth\n";
  for (int i = 0; i < a.count; ++i) {
    const auto& [rgb_path, depth_path] = pairs[static_cast<std::size_t>(i) % pairs.size()];
    const Image rgb = read_image(rgb_path);
    const DepthMap depth = read_depth(depth_path);
    Rng rng(derive_seed(g.seed, static_cast<std::uint64_t>(i)));
    const auto t = generate_training_sample(rgb, depth, s.sampler, model, s.match, rng);
    const auto name = sample_name(i);
    write_map(t.sparse, a.out_dir / (name + "_sparse.pfm"));
    write_map(t.pseudo_gt, a.out_dir / (name + "_dense.pfm"));
    write_png8(a.out_dir / (name + "_guide.png"), t.guide);
    write_camera(t.camera, a.out_dir / (name + "_camera.json"));
    index << name << ',' << rgb_path.string() << ',' << depth_path.string() << '\n';
  }
  return 0;
}

int run_toy_experiment(const Globals& g, const ToyArgs& a) {
  ToyExperimentConfig cfg;
  if (a.target_disparity) cfg.target_disparity = *a.target_disparity;
  if (a.noise_sigma) cfg.noise_sigma = *a.noise_sigma;
  cfg.match = load_settings(g.config).match;
  const auto r = toy_experiment(g.seed, cfg);
  write_toy_outputs(r, a.out_dir);
  std::printf("stereo within 1px: %.4f\ndp within 1px:     %.4f\n", r.stereo.within_1px, r.dp.within_1px);
  return 0;
}

int run_pipeline_command(const Globals& g, const PipelineArgs& a) {
  require_file(a.config, "pipeline config");
  json j = read_json(a.config);
  if (j.is_object() && j.contains("config_hash") && j.contains("config")) j = j["config"];
  if (g.seed_given && j.is_object()) j["seed"] = g.seed;
  if (a.out_dir && j.is_object()) j["output_dir"] = fs::absolute(*a.out_dir).string();
  const auto cfg = pipeline_config_from_json(j, fs::absolute(a.config).parent_path());
  const auto result = run_pipeline(cfg);
  std::printf("run dir: %s\nunrefined AI(1): %.6f\nrefined AI(1):   %.6f\n", result.run_dir.string().c_str(),
              result.unrefined.ai1, result.refined.ai1);
  return 0;
}

}  // namespace dpdisp::cli
