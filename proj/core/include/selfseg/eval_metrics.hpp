#pragma once

#include <map>
#include <string>
#include <vector>

#include "selfseg/label_mask.hpp"

namespace selfseg {

enum class Connectivity { Four = 4, Eight = 8 };

/// Connected components of equal-label pixels. Pixels equal to `ignore_index`
/// get component -1. Components are numbered in raster order of their first
/// pixel.
std::vector<int> connected_components(const LabelMask& mask, Connectivity conn, int* n_components = nullptr);

struct PixelTally {
  long long intersection = 0;
  long long union_ = 0;

  bool operator==(const PixelTally&) const = default;
};

struct IouReport {
  std::map<std::string, double> per_class;
  std::map<std::string, PixelTally> counts;
  double miou = 0.0;
};

struct SegmentMatch {
  int gt_segment = 0;
  int pred_segment = -1;  // -1 when no predicted segment overlaps
  double iou = 0.0;
};

struct CmIouReport {
  std::vector<SegmentMatch> per_segment_best;
  double cmiou = 0.0;
  int n_gt_segments = 0;
};

/// Class-agnostic mIoU for one image. Ground-truth segments are connected
/// components of gt classes; each is scored by the best-overlapping connected
/// component of the prediction (lowest id on ties). Pixels ignored in gt are
/// excluded from every segment.
CmIouReport cmiou(const LabelMask& gt, const LabelMask& pred, Connectivity conn = Connectivity::Four);

/// Per-class IoU over `class_set` names. Pixels ignored in gt are skipped;
/// classes absent from both masks are left out.
IouReport miou(const LabelMask& gt, const LabelMask& pred, const std::vector<std::string>& class_set);

/// Pools per-image reports: class tallies are summed before dividing, and
/// cmIoU averages over all gt segments of all images.
class DatasetAccumulator {
 public:
  void add(const IouReport& report);
  void add(const CmIouReport& report);

  IouReport miou() const;
  double cmiou() const;
  int n_gt_segments() const noexcept { return n_segments_; }

 private:
  std::map<std::string, PixelTally> tallies_;
  double best_iou_sum_ = 0.0;
  int n_segments_ = 0;
};

}  // namespace selfseg
