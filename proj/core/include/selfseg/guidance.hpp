#pragma once

#include <string>
#include <vector>

#include "selfseg/denoise.hpp"
#include "selfseg/label_mask.hpp"
#include "selfseg/noun_filter.hpp"

namespace selfseg {

inline constexpr const char* kBackground = "background";

/// Cluster ids upsampled to pixel resolution.
struct ClusterMask {
  int height = 0;
  int width = 0;
  std::vector<int> labels;

  bool operator==(const ClusterMask&) const = default;
};

/// Nearest-neighbour upsampling: pixel (y, x) takes the label of patch
/// (floor(y*gh/H), floor(x*gw/W)).
ClusterMask clusters_to_mask(const DenoisedGrid& denoised, int image_h, int image_w);

/// Cluster mask as a LabelMask with vocabulary {id: "cluster_<id>"}.
LabelMask cluster_mask_to_label_mask(const ClusterMask& mask);

/// Open-vocabulary segmentor answer: a raster of indices into the requested
/// class list plus the segmentor's own index->name table.
struct SegmentorResponse {
  int height = 0;
  int width = 0;
  std::vector<int> labels;
  std::map<int, std::string> vocabulary;
};

class SegmentorClient {
 public:
  virtual ~SegmentorClient() = default;
  virtual SegmentorResponse segment(const std::string& image_path, const std::vector<std::string>& class_names) = 0;
};

/// Class list handed to the segmentor: "background" at index 0, then the
/// nouns in first-seen order.
std::vector<std::string> guidance_vocabulary(const NounSet& nouns);

/// One segmentor call with the guidance vocabulary. Index i of the returned
/// mask names guidance_vocabulary(nouns)[i].
LabelMask segment_with_guidance(const std::string& image_ref, const NounSet& nouns, SegmentorClient& segmentor);

}  // namespace selfseg
