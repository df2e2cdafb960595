#include <benchmark/benchmark.h>

#include <memory>
#include <random>

#include "trajad/evalkit.hpp"
#include "trajad/ingest.hpp"
#include "trajad/predictor.hpp"
#include "trajad/scoring.hpp"
#include "trajad/synth.hpp"
#include "trajad/trajgeom.hpp"
#include "trajad/weights.hpp"

namespace {

using namespace trajad;

std::vector<BoundingBox> random_boxes(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> pos(0.0, 640.0), size(10.0, 100.0);
  std::vector<BoundingBox> boxes(n);
  for (auto& b : boxes) b = {pos(rng), pos(rng), size(rng), size(rng)};
  return boxes;
}

void BM_Giou(benchmark::State& state) {
  const auto a = random_boxes(1024, 1), b = random_boxes(1024, 2);
  std::size_t k = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(giou(a[k & 1023], b[k & 1023]));
    ++k;
  }
}
BENCHMARK(BM_Giou);

void BM_BuildWindows(benchmark::State& state) {
  Track t{0, {}};
  for (std::int64_t f = 0; f < 300; ++f) t.entries.push_back({f, {1, 1, 1, 1}});
  const auto tau = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(build_windows(t, tau, tau, 1));
}
BENCHMARK(BM_BuildWindows)->Arg(3)->Arg(25);

void BM_ConstantVelocity(benchmark::State& state) {
  const auto obs = random_boxes(5, 3);
  for (auto _ : state) benchmark::DoNotOptimize(predict_constant_velocity(obs, 5));
}
BENCHMARK(BM_ConstantVelocity);

// One window through the full network; hidden size from the argument.
void BM_BitrapPredict(benchmark::State& state) {
  const PredictorConfig cfg{5, 5, static_cast<std::size_t>(state.range(0)), 32, 1};
  const BitrapLitePredictor predictor(std::make_shared<const WeightContainer>(random_weights(cfg, 1)));
  const auto obs = random_boxes(5, 4);
  for (auto _ : state) benchmark::DoNotOptimize(predictor.predict_boxes(obs));
}
BENCHMARK(BM_BitrapPredict)->Arg(32)->Arg(256)->Unit(benchmark::kMicrosecond);

void BM_RocAuc(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  std::mt19937_64 rng(5);
  std::normal_distribution<double> noise;
  std::vector<double> scores(n);
  std::vector<std::uint8_t> labels(n);
  for (std::size_t k = 0; k < n; ++k) {
    labels[k] = k % 17 == 0;
    scores[k] = noise(rng) + labels[k];
  }
  for (auto _ : state) benchmark::DoNotOptimize(roc_auc(scores, labels).auc);
}
BENCHMARK(BM_RocAuc)->Arg(6000)->Arg(100000);

void BM_ScoreScene(benchmark::State& state) {
  const Scene scene = generate(SceneSpec{});
  const ConstantVelocityPredictor cv(5);
  ScoreParams params;
  params.threads = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(score_video(scene.tracks, 300, cv, params));
}
BENCHMARK(BM_ScoreScene)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond);

void BM_GenerateScene(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(generate(SceneSpec{}));
}
BENCHMARK(BM_GenerateScene)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
