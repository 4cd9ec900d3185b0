#include "selfseg/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "selfseg/errors.hpp"
#include "selfseg/rng.hpp"

namespace selfseg {
namespace {

double gaussian(CounterRng& rng) {
  // Box-Muller; the first uniform is kept away from zero.
  const double u1 = 1.0 - rng.next_unit();
  const double u2 = rng.next_unit();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
}

}  // namespace

SyntheticScene::SyntheticScene(const SyntheticSceneParams& params) : params_(params) {
  if (params.n_regions < 2) throw ValidationError("synthetic scene: need at least two regions");
  if (params.content_dim < 1) throw ValidationError("synthetic scene: content_dim must be positive");
  if (params.label_noise < 0.0 || params.label_noise >= 1.0) throw ValidationError("synthetic scene: label_noise in [0,1)");
  CounterRng rng(combine_keys(params.seed, 0x5ce7e));
  for (int b = 1; b < params.n_regions; ++b)
    blobs_.push_back({0.15 + 0.7 * rng.next_unit(), 0.15 + 0.7 * rng.next_unit(), 0.10 + 0.10 * rng.next_unit()});
  for (int r = 0; r < params.n_regions; ++r) {
    std::vector<double> c(static_cast<std::size_t>(params.content_dim));
    for (double& v : c) v = params.center_scale * gaussian(rng);
    centers_.push_back(std::move(c));
  }

  for (const auto& [tag, side] : params.grids) {
    CounterRng g = rng.split(fnv1a64(tag));
    PatchEmbeddingGrid grid;
    grid.height = side;
    grid.width = side;
    grid.dim = params.content_dim;
    grid.resolution_tag = tag;
    std::vector<int> truth = region_raster(side, side);
    int corrupted = 0;
    for (int i = 0; i < side * side; ++i) {
      int source = truth[static_cast<std::size_t>(i)];
      if (g.next_unit() < params.label_noise) {
        const int shift = 1 + static_cast<int>(g.next_u64() % static_cast<std::uint64_t>(params.n_regions - 1));
        source = (source + shift) % params.n_regions;
        ++corrupted;
      }
      for (double c : centers_[static_cast<std::size_t>(source)])
        grid.data.push_back(static_cast<float>(c + params.noise_sigma * gaussian(g)));
    }
    corrupted_[tag] = static_cast<double>(corrupted) / (side * side);
    truth_[tag] = std::move(truth);
    grids_[tag] = std::move(grid);
  }
}

int SyntheticScene::region_at(double x, double y) const {
  int best = 0;
  double best_v = 0.5;
  for (std::size_t b = 0; b < blobs_.size(); ++b) {
    const double dx = x - blobs_[b].cx;
    const double dy = y - blobs_[b].cy;
    const double v = std::exp(-(dx * dx + dy * dy) / (2.0 * blobs_[b].sigma * blobs_[b].sigma));
    if (v > best_v) {
      best_v = v;
      best = static_cast<int>(b) + 1;
    }
  }
  return best;
}

std::vector<int> SyntheticScene::region_raster(int n_rows, int n_cols) const {
  std::vector<int> out(static_cast<std::size_t>(n_rows) * n_cols);
  for (int r = 0; r < n_rows; ++r)
    for (int c = 0; c < n_cols; ++c)
      out[static_cast<std::size_t>(r) * n_cols + c] = region_at((c + 0.5) / n_cols, (r + 0.5) / n_rows);
  return out;
}

double majority_mapped_error(const std::vector<int>& labels, const std::vector<int>& truth) {
  if (labels.size() != truth.size() || labels.empty()) throw ValidationError("majority_mapped_error: size mismatch");
  std::map<int, std::map<int, long>> overlap;
  for (std::size_t i = 0; i < labels.size(); ++i) ++overlap[labels[i]][truth[i]];
  long wrong = 0;
  for (const auto& [label, counts] : overlap) {
    long total = 0, best = 0;
    for (const auto& [t, n] : counts) {
      total += n;
      best = std::max(best, n);
    }
    wrong += total - best;
  }
  return static_cast<double>(wrong) / static_cast<double>(labels.size());
}

}  // namespace selfseg
