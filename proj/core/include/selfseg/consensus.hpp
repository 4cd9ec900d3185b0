#pragma once

#include <string>
#include <vector>

#include "selfseg/cluster_assignment.hpp"
#include "selfseg/hungarian.hpp"

namespace selfseg {

/// Per-patch categorical distribution over consensus labels.
struct ClusterProbabilityField {
  int height = 0;
  int width = 0;
  int n_labels = 0;
  std::vector<double> probs;  // row-major (row, col, label)

  int patch_count() const noexcept { return height * width; }
  const double* patch(int index) const { return probs.data() + static_cast<std::size_t>(index) * n_labels; }
  double* patch(int index) { return probs.data() + static_cast<std::size_t>(index) * n_labels; }

  /// Checks shape, range [0,1] and per-patch sums within `sum_tol`.
  void validate(double sum_tol = 1e-9) const;

  bool operator==(const ClusterProbabilityField&) const = default;
};

/// Source cluster index -> reference cluster index.
struct AlignmentMap {
  std::string source_run;
  std::vector<int> mapping;
  std::vector<double> matched_iou;  // IoU of each source cluster with its target
};

/// IoU between every cluster of `other` (rows) and of `reference` (columns).
CostMatrix iou_matrix(const ClusterAssignment& reference, const ClusterAssignment& other);

/// Index of the assignment with the most non-empty clusters; earliest wins ties.
std::size_t select_reference(const std::vector<ClusterAssignment>& assignments);

/// Maps rows of an IoU matrix (source clusters) onto columns (reference
/// clusters).
///  - Rows whose IoU is zero everywhere map to column 0.
///  - The remaining rows are matched one-to-one by a Hungarian solve on 1-IoU,
///    choosing the lexicographically smallest optimal mapping.
///  - If there are more such rows than columns, rows left unmatched by the
///    solve take their per-row argmax (lowest column on ties).
std::vector<int> align_from_iou(const CostMatrix& iou);

AlignmentMap align(const ClusterAssignment& reference, const ClusterAssignment& other);

/// Rewrites labels through `map`. The result uses the reference label range
/// [0, reference_k) and is not compacted.
std::vector<int> relabel(const ClusterAssignment& assignment, const AlignmentMap& map);

/// Relative frequency of each label across m aligned label stacks. Labels in
/// [0, n_labels) that receive no vote anywhere are removed and the remaining
/// ones renumbered in order.
ClusterProbabilityField fuse(const std::vector<std::vector<int>>& aligned, int height, int width, int n_labels);

/// select_reference + align + relabel + fuse. All assignments must already
/// share one grid.
ClusterProbabilityField build_consensus(const std::vector<ClusterAssignment>& assignments,
                                        std::vector<AlignmentMap>* alignments = nullptr);

}  // namespace selfseg
