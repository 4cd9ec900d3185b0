#include "selfseg/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <set>

#include "selfseg/errors.hpp"
#include "selfseg/rng.hpp"

namespace selfseg {
namespace {

double squared_distance(std::span<const float> a, const double* b, int dim) {
  double s = 0.0;
  for (int d = 0; d < dim; ++d) {
    const double diff = static_cast<double>(a[static_cast<std::size_t>(d)]) - b[d];
    s += diff * diff;
  }
  return s;
}

// k-means++ seeding. Returns row-major centroids (k x dim); fewer than k rows
// when the data has fewer distinct points than k.
std::vector<double> seed_centroids(const PatchEmbeddingGrid& grid, int k, CounterRng rng) {
  const int n = grid.patch_count();
  const int dim = grid.dim;
  std::vector<double> centroids;
  centroids.reserve(static_cast<std::size_t>(k) * dim);
  auto push = [&](int idx) {
    for (float v : grid.patch(idx)) centroids.push_back(v);
  };

  const int first = static_cast<int>(rng.next_u64() % static_cast<std::uint64_t>(n));
  push(first);
  std::vector<double> d2(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) d2[static_cast<std::size_t>(i)] = squared_distance(grid.patch(i), centroids.data(), dim);

  for (int c = 1; c < k; ++c) {
    double total = 0.0;
    for (double v : d2) total += v;
    if (!(total > 0.0)) break;  // every point coincides with a centroid
    const double target = rng.next_unit() * total;
    double acc = 0.0;
    int pick = -1;
    for (int i = 0; i < n; ++i) {
      if (d2[static_cast<std::size_t>(i)] <= 0.0) continue;
      acc += d2[static_cast<std::size_t>(i)];
      pick = i;
      if (acc > target) break;
    }
    push(pick);
    const double* latest = centroids.data() + static_cast<std::size_t>(c) * dim;
    for (int i = 0; i < n; ++i)
      d2[static_cast<std::size_t>(i)] = std::min(d2[static_cast<std::size_t>(i)], squared_distance(grid.patch(i), latest, dim));
  }
  return centroids;
}

}  // namespace

void ClusterConfig::validate() const {
  if (resolutions.empty()) throw ConfigError("cluster config: no resolutions");
  if (k_values.empty()) throw ConfigError("cluster config: no k values");
  if (std::set<std::string>(resolutions.begin(), resolutions.end()).size() != resolutions.size())
    throw ConfigError("cluster config: duplicate resolution");
  if (std::set<int>(k_values.begin(), k_values.end()).size() != k_values.size())
    throw ConfigError("cluster config: duplicate k value");
  for (int k : k_values)
    if (k < 1) throw ConfigError("cluster config: k must be >= 1");
  if (max_iters < 1) throw ConfigError("cluster config: max_iters must be positive");
  if (!(tol >= 0.0)) throw ConfigError("cluster config: tol must be non-negative");
}

std::uint64_t kmeans_run_key(std::uint64_t seed, const std::string& resolution_tag, int k) {
  return combine_keys(combine_keys(seed, fnv1a64(resolution_tag)), static_cast<std::uint64_t>(k));
}

double kmeans_objective(const PatchEmbeddingGrid& grid, const std::vector<int>& labels) {
  const int n = grid.patch_count();
  const int dim = grid.dim;
  const int k = labels.empty() ? 0 : *std::max_element(labels.begin(), labels.end()) + 1;
  std::vector<double> sums(static_cast<std::size_t>(k) * dim, 0.0);
  std::vector<int> counts(static_cast<std::size_t>(k), 0);
  for (int i = 0; i < n; ++i) {
    const int l = labels[static_cast<std::size_t>(i)];
    ++counts[static_cast<std::size_t>(l)];
    auto p = grid.patch(i);
    for (int d = 0; d < dim; ++d) sums[static_cast<std::size_t>(l) * dim + d] += p[static_cast<std::size_t>(d)];
  }
  for (int c = 0; c < k; ++c)
    for (int d = 0; d < dim; ++d)
      if (counts[static_cast<std::size_t>(c)] > 0) sums[static_cast<std::size_t>(c) * dim + d] /= counts[static_cast<std::size_t>(c)];
  double total = 0.0;
  for (int i = 0; i < n; ++i)
    total += squared_distance(grid.patch(i), sums.data() + static_cast<std::size_t>(labels[static_cast<std::size_t>(i)]) * dim, dim);
  return total;
}

ClusterAssignment kmeans(const PatchEmbeddingGrid& grid, int k, std::uint64_t seed, int max_iters,
                         double tol, KMeansTrace* trace) {
  grid.validate();
  const int n = grid.patch_count();
  const int dim = grid.dim;
  if (k < 1) throw ValidationError("kmeans: k must be >= 1");
  if (k > n) throw ValidationError("kmeans: k=" + std::to_string(k) + " exceeds patch count " + std::to_string(n));
  if (max_iters < 1) throw ValidationError("kmeans: max_iters must be positive");
  if (!(tol >= 0.0)) throw ValidationError("kmeans: tol must be non-negative");

  CounterRng rng(kmeans_run_key(seed, grid.resolution_tag, k));
  std::vector<double> centroids = seed_centroids(grid, k, rng);
  int n_centroids = static_cast<int>(centroids.size() / static_cast<std::size_t>(dim));

  std::vector<int> labels(static_cast<std::size_t>(n), -1);
  KMeansTrace local_trace;
  KMeansTrace& tr = trace ? *trace : local_trace;
  tr = KMeansTrace{};

  for (int iter = 0; iter < max_iters; ++iter) {
    // Assignment step; ties go to the lowest centroid index.
    bool changed = false;
    double objective = 0.0;
    for (int i = 0; i < n; ++i) {
      auto p = grid.patch(i);
      int best = 0;
      double best_d = std::numeric_limits<double>::infinity();
      for (int c = 0; c < n_centroids; ++c) {
        const double d = squared_distance(p, centroids.data() + static_cast<std::size_t>(c) * dim, dim);
        if (d < best_d) {
          best_d = d;
          best = c;
        }
      }
      if (labels[static_cast<std::size_t>(i)] != best) changed = true;
      labels[static_cast<std::size_t>(i)] = best;
      objective += best_d;
    }
    tr.objective.push_back(objective);
    tr.iterations = iter + 1;

    // Drop empty clusters and compact both labels and centroids.
    std::vector<int> counts(static_cast<std::size_t>(n_centroids), 0);
    for (int l : labels) ++counts[static_cast<std::size_t>(l)];
    if (std::find(counts.begin(), counts.end(), 0) != counts.end()) {
      std::vector<int> remap(static_cast<std::size_t>(n_centroids), -1);
      std::vector<double> kept;
      int next = 0;
      for (int c = 0; c < n_centroids; ++c) {
        if (counts[static_cast<std::size_t>(c)] == 0) continue;
        remap[static_cast<std::size_t>(c)] = next++;
        kept.insert(kept.end(), centroids.begin() + static_cast<std::ptrdiff_t>(c) * dim,
                    centroids.begin() + static_cast<std::ptrdiff_t>(c + 1) * dim);
      }
      for (int& l : labels) l = remap[static_cast<std::size_t>(l)];
      centroids = std::move(kept);
      n_centroids = next;
      counts.erase(std::remove(counts.begin(), counts.end(), 0), counts.end());
    }
    if (!changed && iter > 0) {
      tr.converged = true;
      break;
    }

    // Update step.
    std::vector<double> sums(static_cast<std::size_t>(n_centroids) * dim, 0.0);
    for (int i = 0; i < n; ++i) {
      auto p = grid.patch(i);
      double* s = sums.data() + static_cast<std::size_t>(labels[static_cast<std::size_t>(i)]) * dim;
      for (int d = 0; d < dim; ++d) s[d] += p[static_cast<std::size_t>(d)];
    }
    double max_shift2 = 0.0;
    for (int c = 0; c < n_centroids; ++c) {
      double shift2 = 0.0;
      for (int d = 0; d < dim; ++d) {
        const std::size_t idx = static_cast<std::size_t>(c) * dim + d;
        const double updated = sums[idx] / counts[static_cast<std::size_t>(c)];
        const double diff = updated - centroids[idx];
        shift2 += diff * diff;
        centroids[idx] = updated;
      }
      max_shift2 = std::max(max_shift2, shift2);
    }
    if (std::sqrt(max_shift2) < tol) {
      tr.converged = true;
      break;
    }
  }

  ClusterAssignment out;
  out.height = grid.height;
  out.width = grid.width;
  out.labels = std::move(labels);
  out.k_effective = compact_labels(out.labels);
  out.run_meta = RunMeta{grid.resolution_tag, k, seed};
  return out;
}

std::vector<ClusterAssignment> run_all(const std::map<std::string, PatchEmbeddingGrid>& grids,
                                       const ClusterConfig& cfg, int jobs) {
  cfg.validate();
  struct Job {
    const PatchEmbeddingGrid* grid;
    int k;
  };
  std::vector<Job> work;
  for (const auto& tag : cfg.resolutions) {
    auto it = grids.find(tag);
    if (it == grids.end()) throw ConfigError("run_all: no embedding grid for resolution '" + tag + "'");
    for (int k : cfg.k_values) work.push_back({&it->second, k});
  }

  std::vector<ClusterAssignment> out(work.size());
  auto run_one = [&](std::size_t i) {
    out[i] = kmeans(*work[i].grid, work[i].k, cfg.seed, cfg.max_iters, cfg.tol);
  };
  if (jobs <= 1 || work.size() <= 1) {
    for (std::size_t i = 0; i < work.size(); ++i) run_one(i);
    return out;
  }
  // Static round-robin partition; each slot is written by exactly one task.
  const std::size_t n_threads = std::min<std::size_t>(static_cast<std::size_t>(jobs), work.size());
  std::vector<std::future<void>> tasks;
  for (std::size_t t = 0; t < n_threads; ++t) {
    tasks.push_back(std::async(std::launch::async, [&, t] {
      for (std::size_t i = t; i < work.size(); i += n_threads) run_one(i);
    }));
  }
  for (auto& f : tasks) f.get();
  return out;
}

}  // namespace selfseg
