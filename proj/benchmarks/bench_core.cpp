#include <random>

#include <benchmark/benchmark.h>

#include "sentinel/assignment.hpp"
#include "sentinel/geometry.hpp"
#include "sentinel/plate.hpp"

namespace {

using namespace sentinel;

std::vector<BBox> random_boxes(std::size_t n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> pos(0.0, 1800.0), size(40.0, 200.0);
  std::vector<BBox> out;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = pos(rng), y = pos(rng);
    out.push_back({x, y, x + size(rng), y + size(rng)});
  }
  return out;
}

void BM_Iou(benchmark::State& state) {
  std::mt19937_64 rng(1);
  const auto boxes = random_boxes(256, rng);
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(iou(boxes[i & 255], boxes[(i * 7 + 3) & 255]));
    ++i;
  }
}
BENCHMARK(BM_Iou);

void BM_Assign(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  CostMatrix m(n, n);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < n; ++c) m(r, c) = u(rng);
  for (auto _ : state) benchmark::DoNotOptimize(assign(m, 0.8));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_Assign)->RangeMultiplier(2)->Range(4, 128)->Complexity();

void BM_EstimateHomography(benchmark::State& state) {
  const Quad src{{Point2{660, 300}, Point2{1260, 300}, Point2{1660, 1000}, Point2{260, 1000}}};
  const Quad dst = make_rectangle(14.0, 40.0);
  for (auto _ : state) benchmark::DoNotOptimize(estimate_homography(src, dst));
}
BENCHMARK(BM_EstimateHomography);

void BM_TransformPoint(benchmark::State& state) {
  const Quad src{{Point2{660, 300}, Point2{1260, 300}, Point2{1660, 1000}, Point2{260, 1000}}};
  const Homography h = estimate_homography(src, make_rectangle(14.0, 40.0));
  Point2 p{900, 700};
  for (auto _ : state) {
    benchmark::DoNotOptimize(transform_point(h, p));
    p.x += 1e-3;
  }
}
BENCHMARK(BM_TransformPoint);

void BM_Cer(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(cer("UBA128C", "UBA123C"));
}
BENCHMARK(BM_Cer);

}  // namespace

BENCHMARK_MAIN();
