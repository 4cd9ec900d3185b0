#include <gtest/gtest.h>

#include <random>
#include <set>

#include "selfseg/clustering.hpp"
#include "selfseg/errors.hpp"

using namespace selfseg;

namespace {

PatchEmbeddingGrid random_grid(std::uint64_t seed, int h, int w, int d, std::string tag = "default_384") {
  std::mt19937_64 rng(seed);
  std::normal_distribution<float> n;
  PatchEmbeddingGrid g{h, w, d, std::vector<float>(static_cast<std::size_t>(h * w * d)), std::move(tag)};
  for (auto& v : g.data) v = n(rng);
  return g;
}

}  // namespace

TEST(KMeans, IdenticalPatchesCollapseToOneCluster) {
  PatchEmbeddingGrid g{6, 6, 4, std::vector<float>(144, 0.25f), "t"};
  const auto a = kmeans(g, 8, 0);
  EXPECT_EQ(a.k_effective, 1);
  EXPECT_EQ(a.labels, std::vector<int>(36, 0));
  EXPECT_EQ(a.run_meta.k_initial, 8);
}

TEST(KMeans, SeparatesTwoDistantClouds) {
  // Cloud membership by column half; centres 100 apart, radius 0.1.
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<float> jitter(-0.05f, 0.05f);
  PatchEmbeddingGrid g{8, 8, 3, std::vector<float>(192), "t"};
  std::vector<int> cloud(64);
  for (int p = 0; p < 64; ++p) {
    cloud[p] = (p % 8) < 4 ? 0 : 1;
    for (int c = 0; c < 3; ++c) g.data[p * 3 + c] = (cloud[p] ? 100.0f / std::sqrt(3.0f) : 0.0f) + jitter(rng);
  }
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto a = kmeans(g, 2, seed);
    ASSERT_EQ(a.k_effective, 2);
    for (int p = 0; p < 64; ++p) ASSERT_EQ(a.labels[p] == a.labels[0], cloud[p] == cloud[0]) << "seed " << seed;
  }
}

TEST(KMeans, ObjectiveNeverIncreases) {
  for (std::uint64_t s = 0; s < 10; ++s) {
    KMeansTrace trace;
    const auto g = random_grid(s, 12, 12, 16);
    const auto a = kmeans(g, 8, s, 100, 1e-6, &trace);
    ASSERT_FALSE(trace.objective.empty());
    for (std::size_t t = 1; t < trace.objective.size(); ++t) ASSERT_LE(trace.objective[t], trace.objective[t - 1]);
    EXPECT_NEAR(trace.objective.back(), kmeans_objective(g, a.labels), 1e-6 * trace.objective.back());
  }
}

TEST(KMeans, DeterministicAndCompact) {
  const auto g = random_grid(3, 10, 10, 8);
  const auto a = kmeans(g, 8, 42);
  EXPECT_EQ(a, kmeans(g, 8, 42));
  EXPECT_NO_THROW(a.validate());
  EXPECT_LE(a.k_effective, 8);
  std::set<int> used(a.labels.begin(), a.labels.end());
  EXPECT_EQ(static_cast<int>(used.size()), a.k_effective);
}

TEST(KMeans, SeedAndResolutionChangeTheKey) {
  EXPECT_NE(kmeans_run_key(0, "default_384", 2), kmeans_run_key(1, "default_384", 2));
  EXPECT_NE(kmeans_run_key(0, "default_384", 2), kmeans_run_key(0, "large_512", 2));
  EXPECT_NE(kmeans_run_key(0, "default_384", 2), kmeans_run_key(0, "default_384", 8));
}

TEST(KMeans, RejectsBadArguments) {
  const auto g = random_grid(0, 2, 2, 2);
  EXPECT_THROW(kmeans(g, 0, 0), ValidationError);
  EXPECT_THROW(kmeans(g, 2, 0, 0), ValidationError);
}

TEST(KMeans, MoreClustersThanPatchesIsRejected) {
  const auto g = random_grid(0, 2, 2, 2);
  EXPECT_THROW(kmeans(g, 8, 0), ValidationError);
  EXPECT_EQ(kmeans(g, 4, 0).k_effective, 4);
}

TEST(RunAll, DefaultConfigGivesFourRunsInOrder) {
  std::map<std::string, PatchEmbeddingGrid> grids{{"default_384", random_grid(1, 24, 24, 8, "default_384")},
                                                  {"large_512", random_grid(2, 32, 32, 8, "large_512")}};
  const ClusterConfig cfg;
  const auto runs = run_all(grids, cfg);
  ASSERT_EQ(runs.size(), 4u);
  EXPECT_EQ(runs[0].run_id(), "default_384/k2");
  EXPECT_EQ(runs[1].run_id(), "default_384/k8");
  EXPECT_EQ(runs[2].run_id(), "large_512/k2");
  EXPECT_EQ(runs[3].run_id(), "large_512/k8");
  EXPECT_EQ(runs[3].height, 32);
  EXPECT_EQ(run_all(grids, cfg, 4), runs);
}

TEST(RunAll, SingleRun) {
  ClusterConfig cfg;
  cfg.resolutions = {"large_512"};
  cfg.k_values = {3};
  std::map<std::string, PatchEmbeddingGrid> grids{{"large_512", random_grid(2, 6, 6, 4, "large_512")}};
  EXPECT_EQ(run_all(grids, cfg).size(), 1u);
}

TEST(RunAll, MissingGridIsAnError) {
  ClusterConfig cfg;
  std::map<std::string, PatchEmbeddingGrid> grids{{"large_512", random_grid(2, 6, 6, 4, "large_512")}};
  EXPECT_THROW(run_all(grids, cfg), ValidationError);
}

TEST(ClusterConfig, Validation) {
  ClusterConfig cfg;
  EXPECT_NO_THROW(cfg.validate());
  cfg.k_values = {2, 2};
  EXPECT_THROW(cfg.validate(), ValidationError);
  cfg = {};
  cfg.k_values = {0};
  EXPECT_THROW(cfg.validate(), ValidationError);
  cfg = {};
  cfg.resolutions = {"a", "a"};
  EXPECT_THROW(cfg.validate(), ValidationError);
  cfg = {};
  cfg.resolutions.clear();
  EXPECT_THROW(cfg.validate(), ValidationError);
  cfg = {};
  cfg.tol = -1;
  EXPECT_THROW(cfg.validate(), ValidationError);
}

TEST(ClusterAssignment, ValidateAndCompact) {
  std::vector<int> labels{5, 2, 5, 9};
  EXPECT_EQ(compact_labels(labels), 3);
  EXPECT_EQ(labels, (std::vector<int>{1, 0, 1, 2}));
  ClusterAssignment a{2, 2, {0, 2, 0, 2}, 3, {"t", 3, 0}};
  EXPECT_THROW(a.validate(), ValidationError);  // label 1 unused
  a = {2, 2, {0, 1, 0, 1}, 2, {"t", 3, 0}};
  EXPECT_NO_THROW(a.validate());
  a.labels.pop_back();
  EXPECT_THROW(a.validate(), ValidationError);
}
