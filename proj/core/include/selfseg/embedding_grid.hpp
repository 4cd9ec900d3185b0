#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "selfseg/cluster_assignment.hpp"

namespace selfseg {

/// H x W grid of D-dimensional patch embeddings, stored row-major as
/// (row, col, channel).
struct PatchEmbeddingGrid {
  int height = 0;
  int width = 0;
  int dim = 0;
  std::vector<float> data;
  std::string resolution_tag;

  int patch_count() const noexcept { return height * width; }

  std::span<const float> patch(int index) const {
    return {data.data() + static_cast<std::size_t>(index) * dim, static_cast<std::size_t>(dim)};
  }
  std::span<const float> patch(int row, int col) const { return patch(row * width + col); }

  void validate() const;

  bool operator==(const PatchEmbeddingGrid&) const = default;
};

/// Fixed-frequency 2-D sine/cosine encoding. The first half of the channels
/// encodes the row, the second half the column; within each half channels
/// alternate sin/cos over inverse frequencies 10000^(-2i/c). A dimension of
/// zero disables the encoding.
class PositionalEncoding {
 public:
  explicit PositionalEncoding(int dim = 256);

  int dim() const noexcept { return dim_; }

  /// Encoding for (row, col) on a height x width grid. Rows and columns are
  /// used as raw integer positions; the grid size only bounds them.
  std::vector<double> encode(int row, int col, int height, int width) const;

 private:
  int dim_;
  int channels_;  // per axis, rounded up to a multiple of two
  std::vector<double> inv_freq_;
};

/// Appends enc(row, col) to every patch vector. Output dim = grid.dim + enc.dim().
PatchEmbeddingGrid augment_with_positions(const PatchEmbeddingGrid& grid,
                                          const PositionalEncoding& enc);

/// Nearest-neighbour label resampling onto a target_h x target_w grid.
/// Source cell for target (r, c) is (floor(r*H/target_h), floor(c*W/target_w)).
/// If a label disappears (downsampling) the result is re-compacted.
ClusterAssignment resample_assignment(const ClusterAssignment& src, int target_h, int target_w);

/// `.peg` patch-embedding container: one JSON header line followed by raw
/// little-endian float32 values.
PatchEmbeddingGrid read_peg(const std::filesystem::path& path);
void write_peg(const std::filesystem::path& path, const PatchEmbeddingGrid& grid);
PatchEmbeddingGrid parse_peg(std::string_view bytes);
std::string serialize_peg(const PatchEmbeddingGrid& grid);

}  // namespace selfseg
