#include <benchmark/benchmark.h>

#include "dpdisp/conversion.hpp"
#include "dpdisp/matching.hpp"
#include "dpdisp/optics.hpp"
#include "dpdisp/random.hpp"
#include "dpdisp/refine.hpp"
#include "dpdisp/scenes.hpp"

using namespace dpdisp;

namespace {

const CameraParams kCamera = CameraParams::from_f_number(0.025, 2.0, 2.0, calibrated_alpha());

Scene bench_scene(int size) { return make_scene(SceneKind::kBoxes, SceneOptions{size, size, 1.5, 3.0, -1}, 1); }

void BM_SimulateDp(benchmark::State& state) {
  const auto scene = bench_scene(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(simulate_dp(scene.image, scene.depth, kCamera, SimConfig{}));
  state.SetItemsProcessed(state.iterations() * state.range(0) * state.range(0));
}
BENCHMARK(BM_SimulateDp)->Arg(128)->Arg(256)->Unit(benchmark::kMillisecond);

void BM_TemplateMatch(benchmark::State& state) {
  const auto scene = bench_scene(static_cast<int>(state.range(0)));
  const auto pair = simulate_dp(scene.image, scene.depth, kCamera, SimConfig{});
  const MatchConfig cfg;
  const auto mask = edge_mask(pair.left, cfg);
  for (auto _ : state) benchmark::DoNotOptimize(template_match(pair, mask, cfg));
  state.SetItemsProcessed(state.iterations() * state.range(0) * state.range(0));
}
BENCHMARK(BM_TemplateMatch)->Arg(128)->Arg(256)->Unit(benchmark::kMillisecond);

void BM_FgsSolve(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const auto scene = bench_scene(n);
  const auto d = depth_to_disparity(scene.depth, kCamera);
  Rng rng(2);
  ConfidenceMap h(n, n);
  for (auto& v : h.values.values()) v = uniform01(rng) < 0.3 ? 1.0 : 0.0;
  for (auto _ : state) benchmark::DoNotOptimize(fgs_solve(d, h, scene.image, FgsConfig{}));
  state.SetItemsProcessed(state.iterations() * n * n);
}
BENCHMARK(BM_FgsSolve)->Arg(128)->Arg(256)->Arg(512)->Unit(benchmark::kMillisecond);

void BM_WeightedMedian(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const auto scene = bench_scene(n);
  const auto d = depth_to_disparity(scene.depth, kCamera);
  for (auto _ : state) benchmark::DoNotOptimize(weighted_median(d, scene.image, 7, 8.0 / 255.0));
  state.SetItemsProcessed(state.iterations() * n * n);
}
BENCHMARK(BM_WeightedMedian)->Arg(128)->Arg(256)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
