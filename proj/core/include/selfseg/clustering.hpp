#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "selfseg/cluster_assignment.hpp"
#include "selfseg/embedding_grid.hpp"

namespace selfseg {

struct ClusterConfig {
  std::vector<std::string> resolutions{"default_384", "large_512"};
  std::vector<int> k_values{2, 8};
  std::uint64_t seed = 0;
  int max_iters = 100;
  double tol = 1e-6;

  void validate() const;
};

/// Per-iteration record of a Lloyd run. objective[t] is the sum of squared
/// distances after the t-th assignment step, measured against the centroids
/// that step assigned to.
struct KMeansTrace {
  std::vector<double> objective;
  int iterations = 0;
  bool converged = false;
};

/// Seeded k-means++ followed by Lloyd iterations. Clusters that lose all
/// members are dropped and the labels compacted, so k_effective <= k.
ClusterAssignment kmeans(const PatchEmbeddingGrid& grid, int k, std::uint64_t seed, int max_iters = 100,
                         double tol = 1e-6, KMeansTrace* trace = nullptr);

/// Sum over patches of the squared distance to the centroid of its label.
double kmeans_objective(const PatchEmbeddingGrid& grid, const std::vector<int>& labels);

/// RNG key for one (seed, resolution, k) run.
std::uint64_t kmeans_run_key(std::uint64_t seed, const std::string& resolution_tag, int k);

/// One k-means run per (resolution, k) pair, ordered by resolution then k.
/// Runs are independent and may be spread over `jobs` threads; the result
/// does not depend on `jobs`.
std::vector<ClusterAssignment> run_all(const std::map<std::string, PatchEmbeddingGrid>& grids,
                                       const ClusterConfig& cfg, int jobs = 1);

}  // namespace selfseg
