#include <cstdlib>
#include <exception>
#include <functional>
#include <iostream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "commands.hpp"
#include "dpdisp/error.hpp"
#include "dpdisp/parallel.hpp"
#include "dpdisp/pipeline.hpp"

namespace {

void setup_logging() {
  auto logger = spdlog::stderr_color_mt("dpdisp");
  spdlog::set_default_logger(logger);
  spdlog::set_pattern("[%l] %v");
  spdlog::set_level(spdlog::level::warn);
  if (const char* env = std::getenv("DP_DISPARITY_LOG")) {
    const std::string name(env);
    const auto level = spdlog::level::from_str(name);
    if (level == spdlog::level::off && name != "off") {
      spdlog::warn("DP_DISPARITY_LOG: unknown level '{}'", name);
    } else {
      spdlog::set_level(level);
    }
  }
}

}  // namespace

int main(int argc, char** argv) {
  using namespace dpdisp::cli;
  setup_logging();

  CLI::App app{"Dual-pixel disparity: simulation, matching, completion, refinement and evaluation"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_version_flag("--version", dpdisp::library_version());

  Globals g;
  app.add_option("--seed", g.seed, "Base seed for every random draw");
  app.add_option("--threads", g.threads, "Worker cap; 0 uses all cores")->check(CLI::NonNegativeNumber);
  app.add_option("--config", g.config, "JSON with optional sim/match/completion/refine/camera_sampler sections");

  std::function<int()> action;

  SimulateArgs sim;
  auto* s = app.add_subcommand("simulate", "Render a dual-pixel view pair from an image and a depth map");
  s->add_option("--image", sim.image, "RGB or gray image (PNG/PFM)");
  s->add_option("--depth", sim.depth, "Metric depth map (PFM or 16-bit PNG)");
  s->add_option("--scene", sim.scene, "Synthetic scene instead of files")
      ->check(CLI::IsMember({"two-plane", "step-edge", "slanted", "boxes", "disc"}));
  s->add_option("--width", sim.width, "Synthetic scene width")->check(CLI::PositiveNumber);
  s->add_option("--height", sim.height, "Synthetic scene height")->check(CLI::PositiveNumber);
  s->add_option("--camera", sim.camera, "Camera JSON")->required();
  s->add_option("--pixel-pitch", sim.pixel_pitch, "Pixel pitch in meters");
  s->add_option("--noise-sigma", sim.noise_sigma, "Gaussian read noise");
  s->add_option("--out-left", sim.out_left)->required();
  s->add_option("--out-right", sim.out_right)->required();
  s->add_option("--out-guide", sim.out_guide, "Write the guide image (PNG)");
  s->add_option("--out-depth", sim.out_depth, "Write the depth map used");
  s->callback([&] { action = [&] { return run_simulate(g, sim); }; });

  MatchArgs match;
  auto* m = app.add_subcommand("match", "Template matching on the edge mask of the left view");
  m->add_option("--left", match.left)->required();
  m->add_option("--right", match.right)->required();
  m->add_option("--config", match.config, "MatchConfig JSON");
  m->add_option("--out-disparity", match.out_disparity)->required();
  m->add_option("--out-mask", match.out_mask);
  m->callback([&] { action = [&] { return run_match(g, match); }; });

  CompleteArgs comp;
  auto* c = app.add_subcommand("complete", "Guided sparse-to-dense completion");
  c->add_option("--sparse", comp.sparse)->required();
  c->add_option("--guide", comp.guide)->required();
  c->add_option("--config", comp.config, "CompletionConfig JSON");
  c->add_option("--out-dense", comp.out_dense)->required();
  c->add_option("--out-conf", comp.out_conf)->required();
  c->callback([&] { action = [&] { return run_complete(g, comp); }; });

  RefineArgs ref;
  auto* r = app.add_subcommand("refine", "Weighted median, confidence refinement and FGS");
  r->add_option("--dense", ref.dense)->required();
  r->add_option("--conf", ref.conf)->required();
  r->add_option("--guide", ref.guide)->required();
  r->add_option("--config", ref.config, "RefineConfig JSON");
  r->add_option("--out", ref.out)->required();
  r->add_option("--out-prefiltered", ref.out_prefiltered);
  r->add_option("--out-confidence", ref.out_confidence, "Binarized confidence fed to the smoother");
  r->callback([&] { action = [&] { return run_refine(g, ref); }; });

  EvalArgs ev;
  auto* e = app.add_subcommand("eval", "AI(1), AI(2) and 1-|rho_s| against ground truth");
  e->add_option("--est", ev.est)->required();
  e->add_option("--gt", ev.gt)->required();
  e->add_option("--gt-kind", ev.gt_kind)->check(CLI::IsMember({"inverse-depth", "depth", "disparity"}));
  e->add_option("--crop", ev.crop, "x,y,width,height");
  e->add_option("--out", ev.out, "MetricReport JSON (stdout when absent)");
  e->add_option("--csv", ev.csv, "Append a CSV row");
  e->callback([&] { action = [&] { return run_eval(g, ev); }; });

  FitArgs fit;
  auto* f = app.add_subcommand("fit-error-model", "Simulated sweep plus error-model fit");
  f->add_option("--sweep-config", fit.sweep_config)->required();
  f->add_option("--out-model", fit.out_model)->required();
  f->add_option("--out-records", fit.out_records, "Sweep records CSV");
  f->callback([&] { action = [&] { return run_fit_error_model(g, fit); }; });

  DatagenArgs dg;
  auto* d = app.add_subcommand("datagen", "Sparse training samples from RGB-D pairs");
  d->add_option("--manifest", dg.manifest, "CSV of rgb,depth paths")->required();
  d->add_option("--model", dg.model, "Error model JSON");
  d->add_option("--count", dg.count);
  d->add_option("--out-dir", dg.out_dir)->required();
  d->callback([&] { action = [&] { return run_datagen(g, dg); }; });

  ToyArgs toy;
  auto* t = app.add_subcommand("toy-experiment", "Stereo vs dual-pixel matching on a random-dot plane");
  t->add_option("--out-dir", toy.out_dir)->required();
  t->add_option("--target-disparity", toy.target_disparity);
  t->add_option("--noise-sigma", toy.noise_sigma);
  t->callback([&] { action = [&] { return run_toy_experiment(g, toy); }; });

  PipelineArgs pipe;
  auto* p = app.add_subcommand("pipeline", "simulate -> match -> complete -> refine -> eval");
  p->add_option("--config", pipe.config, "Pipeline JSON or a previous manifest.json")->required();
  p->add_option("--out-dir", pipe.out_dir);
  p->callback([&] { action = [&] { return run_pipeline_command(g, pipe); }; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    const int code = app.exit(err);
    return code == 0 ? 0 : static_cast<int>(dpdisp::ErrorFamily::kConfig);
  }
  g.seed_given = app.count("--seed") > 0;

  try {
    dpdisp::set_thread_count(g.threads);
    return action();
  } catch (const nlohmann::json::exception& err) {
    spdlog::error("{}", err.what());
    return static_cast<int>(dpdisp::ErrorFamily::kConfig);
  } catch (const std::exception& err) {
    spdlog::error("{}", err.what());
    return static_cast<int>(dpdisp::family_of(err));
  }
}
