#include "selfseg/consensus.hpp"

#include <algorithm>
#include <cmath>

#include "selfseg/errors.hpp"

namespace selfseg {

void ClusterProbabilityField::validate(double sum_tol) const {
  if (height <= 0 || width <= 0 || n_labels <= 0)
    throw ValidationError("probability field: non-positive shape");
  if (probs.size() != static_cast<std::size_t>(patch_count()) * n_labels)
    throw ValidationError("probability field: data length mismatch");
  for (int i = 0; i < patch_count(); ++i) {
    double sum = 0.0;
    const double* p = patch(i);
    for (int l = 0; l < n_labels; ++l) {
      if (!(p[l] >= 0.0 && p[l] <= 1.0)) throw ValidationError("probability field: value outside [0,1]");
      sum += p[l];
    }
    if (std::abs(sum - 1.0) > sum_tol)
      throw ValidationError("probability field: patch " + std::to_string(i) + " sums to " + std::to_string(sum));
  }
}

CostMatrix iou_matrix(const ClusterAssignment& reference, const ClusterAssignment& other) {
  if (reference.height != other.height || reference.width != other.width)
    throw ValidationError("align: assignments are on different grids");
  reference.validate();
  other.validate();
  const int rows = other.k_effective;
  const int cols = reference.k_effective;
  std::vector<long long> inter(static_cast<std::size_t>(rows) * cols, 0);
  std::vector<long long> row_size(static_cast<std::size_t>(rows), 0), col_size(static_cast<std::size_t>(cols), 0);
  for (std::size_t i = 0; i < other.labels.size(); ++i) {
    const int r = other.labels[i];
    const int c = reference.labels[i];
    ++inter[static_cast<std::size_t>(r) * cols + c];
    ++row_size[static_cast<std::size_t>(r)];
    ++col_size[static_cast<std::size_t>(c)];
  }
  CostMatrix iou{rows, cols, std::vector<double>(static_cast<std::size_t>(rows) * cols, 0.0)};
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) {
      const long long in = inter[static_cast<std::size_t>(r) * cols + c];
      const long long un = row_size[static_cast<std::size_t>(r)] + col_size[static_cast<std::size_t>(c)] - in;
      iou(r, c) = un > 0 ? static_cast<double>(in) / static_cast<double>(un) : 0.0;
    }
  return iou;
}

std::size_t select_reference(const std::vector<ClusterAssignment>& assignments) {
  if (assignments.empty()) throw ValidationError("select_reference: no assignments");
  std::size_t best = 0;
  for (std::size_t i = 1; i < assignments.size(); ++i)
    if (assignments[i].k_effective > assignments[best].k_effective) best = i;
  return best;
}

std::vector<int> align_from_iou(const CostMatrix& iou) {
  if (iou.cols <= 0) throw ValidationError("align: reference has no clusters");
  std::vector<int> mapping(static_cast<std::size_t>(iou.rows), 0);
  std::vector<int> live;
  for (int r = 0; r < iou.rows; ++r) {
    bool any = false;
    for (int c = 0; c < iou.cols; ++c) any = any || iou(r, c) > 0.0;
    if (any) live.push_back(r);
  }
  if (live.empty()) return mapping;

  // Surplus rows are matched against zero-IoU dummy columns, which sort after
  // every real column in the lexicographic tie-break.
  const int n_live = static_cast<int>(live.size());
  const int cols = std::max(iou.cols, n_live);
  CostMatrix cost{n_live, cols, std::vector<double>(static_cast<std::size_t>(n_live) * cols, 1.0)};
  for (int i = 0; i < n_live; ++i)
    for (int c = 0; c < iou.cols; ++c) cost(i, c) = 1.0 - iou(live[static_cast<std::size_t>(i)], c);
  const auto solved = solve_assignment_lexicographic(cost);

  for (int i = 0; i < n_live; ++i) {
    const int r = live[static_cast<std::size_t>(i)];
    int c = solved[static_cast<std::size_t>(i)];
    if (c >= iou.cols) {
      c = 0;
      for (int cc = 1; cc < iou.cols; ++cc)
        if (iou(r, cc) > iou(r, c)) c = cc;
    }
    mapping[static_cast<std::size_t>(r)] = c;
  }
  return mapping;
}

AlignmentMap align(const ClusterAssignment& reference, const ClusterAssignment& other) {
  const CostMatrix iou = iou_matrix(reference, other);
  AlignmentMap map;
  map.source_run = other.run_id();
  map.mapping = align_from_iou(iou);
  for (int r = 0; r < iou.rows; ++r) map.matched_iou.push_back(iou(r, map.mapping[static_cast<std::size_t>(r)]));
  return map;
}

std::vector<int> relabel(const ClusterAssignment& assignment, const AlignmentMap& map) {
  if (map.mapping.size() != static_cast<std::size_t>(assignment.k_effective))
    throw ValidationError("relabel: alignment map does not cover every cluster");
  std::vector<int> out(assignment.labels.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = map.mapping[static_cast<std::size_t>(assignment.labels[i])];
  return out;
}

ClusterProbabilityField fuse(const std::vector<std::vector<int>>& aligned, int height, int width, int n_labels) {
  if (aligned.empty()) throw ValidationError("fuse: no assignments");
  if (height <= 0 || width <= 0 || n_labels <= 0) throw ValidationError("fuse: non-positive shape");
  const std::size_t n = static_cast<std::size_t>(height) * width;
  std::vector<int> counts(n * static_cast<std::size_t>(n_labels), 0);
  for (const auto& labels : aligned) {
    if (labels.size() != n) throw ValidationError("fuse: assignment on a different grid");
    for (std::size_t p = 0; p < n; ++p) {
      const int l = labels[p];
      if (l < 0 || l >= n_labels) throw ValidationError("fuse: label " + std::to_string(l) + " out of range");
      ++counts[p * static_cast<std::size_t>(n_labels) + static_cast<std::size_t>(l)];
    }
  }
  std::vector<int> keep;
  for (int l = 0; l < n_labels; ++l) {
    for (std::size_t p = 0; p < n; ++p)
      if (counts[p * static_cast<std::size_t>(n_labels) + static_cast<std::size_t>(l)] > 0) {
        keep.push_back(l);
        break;
      }
  }
  const double m = static_cast<double>(aligned.size());
  ClusterProbabilityField field;
  field.height = height;
  field.width = width;
  field.n_labels = static_cast<int>(keep.size());
  field.probs.resize(n * keep.size());
  for (std::size_t p = 0; p < n; ++p)
    for (std::size_t j = 0; j < keep.size(); ++j)
      field.probs[p * keep.size() + j] =
          static_cast<double>(counts[p * static_cast<std::size_t>(n_labels) + static_cast<std::size_t>(keep[j])]) / m;
  return field;
}

ClusterProbabilityField build_consensus(const std::vector<ClusterAssignment>& assignments,
                                        std::vector<AlignmentMap>* alignments) {
  const std::size_t ref_index = select_reference(assignments);
  const ClusterAssignment& ref = assignments[ref_index];
  std::vector<std::vector<int>> aligned;
  aligned.reserve(assignments.size());
  if (alignments) alignments->clear();
  for (const auto& a : assignments) {
    AlignmentMap map = align(ref, a);
    aligned.push_back(relabel(a, map));
    if (alignments) alignments->push_back(std::move(map));
  }
  return fuse(aligned, ref.height, ref.width, ref.k_effective);
}

}  // namespace selfseg
