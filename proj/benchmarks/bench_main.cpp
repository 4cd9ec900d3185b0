#include <benchmark/benchmark.h>

#include <random>

#include "selfseg/clustering.hpp"
#include "selfseg/consensus.hpp"
#include "selfseg/denoise.hpp"
#include "selfseg/eval_metrics.hpp"
#include "selfseg/synthetic.hpp"

using namespace selfseg;

namespace {

const SyntheticScene& scene() {
  static const SyntheticScene s([] {
    SyntheticSceneParams p;
    p.content_dim = 768;
    p.n_regions = 6;
    p.seed = 3;
    return p;
  }());
  return s;
}

LabelMask random_mask(int size, int n_classes, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  LabelMask m;
  m.height = m.width = size;
  m.labels.resize(static_cast<std::size_t>(size * size));
  // Blocks of 16x16 so segments have realistic extents.
  std::vector<int> blocks(static_cast<std::size_t>((size / 16 + 1) * (size / 16 + 1)));
  for (auto& b : blocks) b = static_cast<int>(rng() % static_cast<unsigned>(n_classes));
  for (int r = 0; r < size; ++r)
    for (int c = 0; c < size; ++c)
      m.labels[static_cast<std::size_t>(r * size + c)] = blocks[static_cast<std::size_t>((r / 16) * (size / 16 + 1) + c / 16)];
  for (int i = 0; i < n_classes; ++i) m.vocabulary[i] = "c" + std::to_string(i);
  return m;
}

}  // namespace

// k-means on a 32x32 grid of 768-dim embeddings.
static void BM_KMeans(benchmark::State& state) {
  const auto& grid = scene().grids().at("large_512");
  const int k = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(kmeans(grid, k, 1));
}
BENCHMARK(BM_KMeans)->Arg(2)->Arg(8)->Unit(benchmark::kMillisecond);

static void BM_Align(benchmark::State& state) {
  const auto& grid = scene().grids().at("large_512");
  const auto a = kmeans(grid, 8, 1);
  const auto b = kmeans(grid, 8, 2);
  for (auto _ : state) benchmark::DoNotOptimize(align(a, b));
}
BENCHMARK(BM_Align);

static void BM_CrfRefine(benchmark::State& state) {
  const auto& grid = scene().grids().at("large_512");
  std::vector<ClusterAssignment> runs;
  for (std::uint64_t s = 1; s <= 4; ++s) runs.push_back(kmeans(grid, 8, s));
  const auto field = build_consensus(runs);
  for (auto _ : state) benchmark::DoNotOptimize(crf_refine(field, CrfParams{}));
}
BENCHMARK(BM_CrfRefine)->Unit(benchmark::kMicrosecond);

static void BM_CmIou(benchmark::State& state) {
  const int size = static_cast<int>(state.range(0));
  const auto gt = random_mask(size, 6, 1);
  const auto pred = random_mask(size, 9, 2);
  for (auto _ : state) benchmark::DoNotOptimize(cmiou(gt, pred));
}
BENCHMARK(BM_CmIou)->Arg(128)->Arg(512)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
