#include <benchmark/benchmark.h>

#include "sentinel/engine.hpp"
#include "sentinel/scenario.hpp"
#include "sentinel/tracker.hpp"

namespace {

using namespace sentinel;

Scenario scene(std::size_t vehicles) {
  ScenarioSpec spec = make_traffic_scene(demo_calibration(), vehicles, 30, 90, 11);
  spec.noise.bbox_jitter_px = 2.0;
  spec.noise.drop_probability = 0.1;
  spec.noise.score_min = 0.3;
  spec.noise.score_max = 0.95;
  return generate_scenario(spec, 11);
}

void BM_TrackerStep(benchmark::State& state) {
  const Scenario sc = scene(static_cast<std::size_t>(state.range(0)));
  std::size_t frames = 0;
  for (auto _ : state) {
    Tracker t;
    for (const auto& f : sc.frames) benchmark::DoNotOptimize(t.step(f.detections));
    frames += sc.frames.size();
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(frames));
}
BENCHMARK(BM_TrackerStep)->Arg(5)->Arg(20)->Arg(50);

void BM_Engine(benchmark::State& state) {
  const Scenario sc = scene(static_cast<std::size_t>(state.range(0)));
  const Calibration cal = demo_calibration();
  std::size_t frames = 0;
  for (auto _ : state) {
    std::size_t reports = 0;
    EngineSinks sinks;
    sinks.on_report = [&](const TrackReport&) { ++reports; };
    Engine e(EngineConfig{}, cal, nullptr, std::move(sinks));
    for (const auto& f : sc.frames) e.process(f);
    e.finish();
    benchmark::DoNotOptimize(reports);
    frames += sc.frames.size();
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(frames));
}
BENCHMARK(BM_Engine)->Arg(5)->Arg(20)->Arg(50);

}  // namespace
