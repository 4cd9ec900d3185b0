#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "selfseg/embedding_grid.hpp"

namespace selfseg {

/// Seeded synthetic scenes: a background region plus Gaussian blobs, sampled
/// as patch-embedding grids. Each region has a random centre vector; patches
/// get their region's centre plus isotropic noise. A fraction of patches is
/// corrupted with the centre of a different region (label noise).
struct SyntheticSceneParams {
  int n_regions = 4;  // including background
  int content_dim = 32;
  double center_scale = 5.0;
  double noise_sigma = 1.0;
  double label_noise = 0.2;
  std::vector<std::pair<std::string, int>> grids{{"default_384", 24}, {"large_512", 32}};
  std::uint64_t seed = 0;
};

class SyntheticScene {
 public:
  explicit SyntheticScene(const SyntheticSceneParams& params);

  /// Region of the point (x, y) in the unit square.
  int region_at(double x, double y) const;
  /// Region of every cell of an n_rows x n_cols raster (cell centres).
  std::vector<int> region_raster(int n_rows, int n_cols) const;

  /// Noisy embeddings keyed by resolution tag.
  const std::map<std::string, PatchEmbeddingGrid>& grids() const noexcept { return grids_; }
  /// Clean region labels on the grid with the given tag.
  const std::vector<int>& truth(const std::string& tag) const { return truth_.at(tag); }
  /// Fraction of patches whose embedding was corrupted, per tag.
  double corrupted_fraction(const std::string& tag) const { return corrupted_.at(tag); }

  int n_regions() const noexcept { return params_.n_regions; }

 private:
  struct Blob {
    double cx, cy, sigma;
  };
  SyntheticSceneParams params_;
  std::vector<Blob> blobs_;
  std::vector<std::vector<double>> centers_;
  std::map<std::string, PatchEmbeddingGrid> grids_;
  std::map<std::string, std::vector<int>> truth_;
  std::map<std::string, double> corrupted_;
};

/// Error rate of `labels` against `truth` after mapping every predicted label
/// to the truth label it overlaps most (lowest truth label on ties).
double majority_mapped_error(const std::vector<int>& labels, const std::vector<int>& truth);

}  // namespace selfseg
