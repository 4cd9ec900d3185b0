#include "selfseg/embedding_grid.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "selfseg/errors.hpp"

namespace selfseg {

void ClusterAssignment::validate() const {
  if (height <= 0 || width <= 0) throw ValidationError("cluster assignment: non-positive grid size");
  if (labels.size() != static_cast<std::size_t>(height) * width)
    throw ValidationError("cluster assignment: label count does not match grid size");
  if (k_effective <= 0) throw ValidationError("cluster assignment: k_effective must be positive");
  std::vector<char> seen(static_cast<std::size_t>(k_effective), 0);
  for (int l : labels) {
    if (l < 0 || l >= k_effective)
      throw ValidationError("cluster assignment: label " + std::to_string(l) + " outside [0, k_effective)");
    seen[static_cast<std::size_t>(l)] = 1;
  }
  if (std::find(seen.begin(), seen.end(), 0) != seen.end())
    throw ValidationError("cluster assignment: labels are not compact");
}

std::string ClusterAssignment::run_id() const {
  return run_meta.resolution_tag + "/k" + std::to_string(run_meta.k_initial);
}

int compact_labels(std::vector<int>& labels) {
  std::set<int> distinct(labels.begin(), labels.end());
  std::vector<int> sorted(distinct.begin(), distinct.end());
  for (int& l : labels)
    l = static_cast<int>(std::lower_bound(sorted.begin(), sorted.end(), l) - sorted.begin());
  return static_cast<int>(sorted.size());
}

void PatchEmbeddingGrid::validate() const {
  if (height <= 0 || width <= 0 || dim <= 0)
    throw ValidationError("embedding grid: height, width and dim must be positive");
  if (data.size() != static_cast<std::size_t>(height) * width * dim)
    throw ValidationError("embedding grid: data length " + std::to_string(data.size()) +
                          " != height*width*dim");
  for (float v : data)
    if (!std::isfinite(v)) throw ValidationError("embedding grid: non-finite value");
}

PositionalEncoding::PositionalEncoding(int dim) : dim_(dim), channels_(0) {
  if (dim < 0) throw ValidationError("positional encoding: negative dimension");
  if (dim > 0 && dim < 4)
    throw ValidationError("positional encoding: dimension must be 0 or at least 4 to cover both axes");
  if (dim == 0) return;
  channels_ = static_cast<int>(std::ceil(dim / 4.0)) * 2;
  for (int i = 0; i < channels_; i += 2)
    inv_freq_.push_back(1.0 / std::pow(10000.0, static_cast<double>(i) / channels_));
}

std::vector<double> PositionalEncoding::encode(int row, int col, int height, int width) const {
  if (row < 0 || col < 0 || row >= height || col >= width)
    throw ValidationError("positional encoding: position outside grid");
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(2 * channels_));
  for (int axis = 0; axis < 2; ++axis) {
    const double pos = axis == 0 ? row : col;
    for (double f : inv_freq_) {
      out.push_back(std::sin(pos * f));
      out.push_back(std::cos(pos * f));
    }
  }
  out.resize(static_cast<std::size_t>(dim_));
  return out;
}

PatchEmbeddingGrid augment_with_positions(const PatchEmbeddingGrid& grid,
                                          const PositionalEncoding& enc) {
  grid.validate();
  if (enc.dim() == 0) return grid;
  PatchEmbeddingGrid out;
  out.height = grid.height;
  out.width = grid.width;
  out.dim = grid.dim + enc.dim();
  out.resolution_tag = grid.resolution_tag;
  out.data.reserve(static_cast<std::size_t>(out.patch_count()) * out.dim);
  for (int r = 0; r < grid.height; ++r) {
    for (int c = 0; c < grid.width; ++c) {
      auto p = grid.patch(r, c);
      out.data.insert(out.data.end(), p.begin(), p.end());
      for (double v : enc.encode(r, c, grid.height, grid.width))
        out.data.push_back(static_cast<float>(v));
    }
  }
  return out;
}

ClusterAssignment resample_assignment(const ClusterAssignment& src, int target_h, int target_w) {
  src.validate();
  if (target_h <= 0 || target_w <= 0) throw ValidationError("resample: target size must be positive");
  ClusterAssignment out;
  out.height = target_h;
  out.width = target_w;
  out.run_meta = src.run_meta;
  out.labels.resize(static_cast<std::size_t>(target_h) * target_w);
  for (int r = 0; r < target_h; ++r) {
    const int sr = static_cast<int>(static_cast<long long>(r) * src.height / target_h);
    for (int c = 0; c < target_w; ++c) {
      const int sc = static_cast<int>(static_cast<long long>(c) * src.width / target_w);
      out.labels[static_cast<std::size_t>(r) * target_w + c] = src.at(sr, sc);
    }
  }
  std::vector<char> present(static_cast<std::size_t>(src.k_effective), 0);
  for (int l : out.labels) present[static_cast<std::size_t>(l)] = 1;
  if (std::find(present.begin(), present.end(), 0) == present.end())
    out.k_effective = src.k_effective;
  else
    out.k_effective = compact_labels(out.labels);
  return out;
}

}  // namespace selfseg
