#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace selfseg {

struct RunMeta {
  std::string resolution_tag;
  int k_initial = 0;
  std::uint64_t seed = 0;

  bool operator==(const RunMeta&) const = default;
};

/// Hard per-patch labels from one clustering run. Labels are compact:
/// every index in [0, k_effective) is used at least once.
struct ClusterAssignment {
  int height = 0;
  int width = 0;
  std::vector<int> labels;  // row-major
  int k_effective = 0;
  RunMeta run_meta;

  std::size_t size() const noexcept { return labels.size(); }
  int at(int row, int col) const { return labels[static_cast<std::size_t>(row) * width + col]; }

  /// Throws ValidationError when any invariant does not hold.
  void validate() const;

  /// Human-readable run identifier, e.g. "large_512/k8".
  std::string run_id() const;

  bool operator==(const ClusterAssignment&) const = default;
};

/// Renumbers labels to 0..n-1 preserving the order of the original indices.
/// Returns the number of distinct labels.
int compact_labels(std::vector<int>& labels);

}  // namespace selfseg
