#pragma once

#include <vector>

#include "selfseg/consensus.hpp"

namespace selfseg {

struct CrfParams {
  double smoothness_weight = 6.0;
  double smoothness_theta = 0.8;  // Gaussian std in patch units
  int n_iters = 5;
  double unary_floor = 1e-6;  // probabilities are clamped here before taking logs

  void validate() const;
  bool operator==(const CrfParams&) const = default;
};

/// Plain H x W grid of hard labels.
struct LabelGrid {
  int height = 0;
  int width = 0;
  std::vector<int> labels;

  int at(int row, int col) const { return labels[static_cast<std::size_t>(row) * width + col]; }
  bool operator==(const LabelGrid&) const = default;
};

struct DenoiseProvenance {
  CrfParams crf;
  int majority_iters_used = 0;
  int majority_max_iters = 8;
  bool majority_converged = false;

  bool operator==(const DenoiseProvenance&) const = default;
};

struct DenoisedGrid {
  int height = 0;
  int width = 0;
  std::vector<int> labels;
  DenoiseProvenance provenance;

  int at(int row, int col) const { return labels[static_cast<std::size_t>(row) * width + col]; }
  /// Distinct labels in ascending order.
  std::vector<int> label_set() const;
  bool operator==(const DenoisedGrid&) const = default;
};

/// Truncated Gaussian weights exp(-d^2 / (2 theta^2)) over offsets with
/// |dr|, |dc| <= ceil(3 theta). The centre weight is zero: a patch does not
/// message itself. Returned as a (2R+1)^2 row-major table.
std::vector<double> crf_kernel(double theta, int* radius = nullptr);

/// Mean-field refinement with a Potts model and a Gaussian spatial kernel:
///   Q <- softmax(log(max(U, floor)) + w * (K * Q))
/// repeated n_iters times starting from Q = U, with zero padding at borders.
/// All patches are updated from the previous iterate. w == 0 returns `field`.
ClusterProbabilityField crf_refine(const ClusterProbabilityField& field, const CrfParams& params);

/// Per-patch argmax, lowest label on ties.
LabelGrid harden(const ClusterProbabilityField& field);

struct MajorityResult {
  LabelGrid grid;
  int passes = 0;
  bool converged = false;
};

/// 3x3 mode filter (centre included, borders clipped, ties to the lowest
/// label) repeated until a pass changes nothing or `max_iters` passes ran.
MajorityResult majority_filter(const LabelGrid& labels, int max_iters = 8);

/// crf_refine -> harden -> majority_filter.
DenoisedGrid denoise(const ClusterProbabilityField& field, const CrfParams& params, int majority_max_iters = 8);

}  // namespace selfseg
