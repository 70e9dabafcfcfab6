// Serial vs OpenMP comparison for the data-parallel kernels, plus the full
// per-frame pipeline at both baseline and full-toggle configurations.
#include <benchmark/benchmark.h>

#include <vector>

#include "motcup/conformal.hpp"
#include "motcup/kernels.hpp"
#include "motcup/simgen.hpp"
#include "motcup/tracker.hpp"

using namespace motcup;

namespace {

std::vector<BoxState> random_boxes(int n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<BoxState> out;
  out.reserve(n);
  for (int i = 0; i < n; ++i) {
    out.push_back(BoxState{rng.uniform(0.0, 100.0), rng.uniform(0.0, 100.0),
                           rng.uniform(1.0, 4.0), rng.uniform(1.0, 4.0)});
  }
  return out;
}

std::vector<Detection> random_detections(int n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<Detection> out;
  out.reserve(n);
  for (int i = 0; i < n; ++i) {
    Detection d;
    d.mean = {rng.uniform(0.0, 100.0), rng.uniform(0.0, 100.0),
              rng.uniform(1.0, 4.0), rng.uniform(1.0, 4.0)};
    d.sigma = {rng.uniform(0.1, 2.0), rng.uniform(0.1, 2.0),
               rng.uniform(0.1, 2.0), rng.uniform(0.1, 2.0)};
    d.score = 0.9;
    d.class_prob = 0.9;
    out.push_back(d);
  }
  return out;
}

ScenarioConfig bench_scenario() {
  ScenarioConfig cfg;
  cfg.n_objects = 50;
  cfg.n_frames = 100;
  cfg.seed = 7;
  return cfg;
}

void BM_iou_cost_serial(benchmark::State& state) {
  const auto a = random_boxes(static_cast<int>(state.range(0)), 1);
  const auto b = random_boxes(static_cast<int>(state.range(0)), 2);
  for (auto _ : state) {
    benchmark::DoNotOptimize(kernels::iou_cost_serial(a, b));
  }
}

void BM_iou_cost_parallel(benchmark::State& state) {
  const auto a = random_boxes(static_cast<int>(state.range(0)), 1);
  const auto b = random_boxes(static_cast<int>(state.range(0)), 2);
  for (auto _ : state) {
    benchmark::DoNotOptimize(kernels::iou_cost_parallel(a, b));
  }
}

void BM_snll_matrix_serial(benchmark::State& state) {
  const auto dets = random_detections(static_cast<int>(state.range(0)), 3);
  const auto boxes = random_boxes(static_cast<int>(state.range(0)), 4);
  std::vector<Vec4> preds;
  for (const auto& b : boxes) preds.push_back(Vec4{b.cx, b.cy, b.w, b.h});
  for (auto _ : state) {
    benchmark::DoNotOptimize(kernels::snll_matrix_serial(dets, preds));
  }
}

void BM_snll_matrix_parallel(benchmark::State& state) {
  const auto dets = random_detections(static_cast<int>(state.range(0)), 3);
  const auto boxes = random_boxes(static_cast<int>(state.range(0)), 4);
  std::vector<Vec4> preds;
  for (const auto& b : boxes) preds.push_back(Vec4{b.cx, b.cy, b.w, b.h});
  for (auto _ : state) {
    benchmark::DoNotOptimize(kernels::snll_matrix_parallel(dets, preds));
  }
}

void BM_calibration_scores_serial(benchmark::State& state) {
  const auto gen = generate_scene(bench_scenario());
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        kernels::calibration_scores_serial(gen.scene, gen.gt, 0.5));
  }
}

void BM_calibration_scores_parallel(benchmark::State& state) {
  const auto gen = generate_scene(bench_scenario());
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        kernels::calibration_scores_parallel(gen.scene, gen.gt, 0.5));
  }
}

void BM_run_scene_baseline(benchmark::State& state) {
  const auto gen = generate_scene(bench_scenario());
  TrackerConfig cfg;
  for (auto _ : state) {
    benchmark::DoNotOptimize(run_scene(gen.scene, cfg, std::nullopt));
  }
}

void BM_run_scene_full(benchmark::State& state) {
  auto scen = bench_scenario();
  const auto gen = generate_scene(scen);
  scen.seed ^= 0x9E3779B97F4A7C15ull;
  const auto cal = generate_scene(scen);
  const QuantileSet q = calibrate(cal.scene, cal.gt, 0.1, 0.5);
  TrackerConfig cfg;
  cfg.use_cp = cfg.use_sdkf = cfg.use_nllai = true;
  for (auto _ : state) {
    benchmark::DoNotOptimize(run_scene(gen.scene, cfg, q));
  }
}

}  // namespace

BENCHMARK(BM_iou_cost_serial)->Arg(64)->Arg(256)->Arg(1024);
BENCHMARK(BM_iou_cost_parallel)->Arg(64)->Arg(256)->Arg(1024);
BENCHMARK(BM_snll_matrix_serial)->Arg(64)->Arg(256)->Arg(1024);
BENCHMARK(BM_snll_matrix_parallel)->Arg(64)->Arg(256)->Arg(1024);
BENCHMARK(BM_calibration_scores_serial);
BENCHMARK(BM_calibration_scores_parallel);
BENCHMARK(BM_run_scene_baseline)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_run_scene_full)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
