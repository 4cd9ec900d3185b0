#include "selfseg/guidance.hpp"

#include "selfseg/errors.hpp"

namespace selfseg {

ClusterMask clusters_to_mask(const DenoisedGrid& denoised, int image_h, int image_w) {
  if (image_h <= 0 || image_w <= 0) throw ValidationError("clusters_to_mask: target size must be positive");
  if (denoised.height <= 0 || denoised.width <= 0 ||
      denoised.labels.size() != static_cast<std::size_t>(denoised.height) * denoised.width)
    throw ValidationError("clusters_to_mask: malformed cluster grid");
  ClusterMask out{image_h, image_w, std::vector<int>(static_cast<std::size_t>(image_h) * image_w)};
  for (int y = 0; y < image_h; ++y) {
    const int r = static_cast<int>(static_cast<long long>(y) * denoised.height / image_h);
    for (int x = 0; x < image_w; ++x) {
      const int c = static_cast<int>(static_cast<long long>(x) * denoised.width / image_w);
      out.labels[static_cast<std::size_t>(y) * image_w + x] = denoised.at(r, c);
    }
  }
  return out;
}

LabelMask cluster_mask_to_label_mask(const ClusterMask& mask) {
  LabelMask out;
  out.height = mask.height;
  out.width = mask.width;
  out.labels = mask.labels;
  for (int l : mask.labels) out.vocabulary.emplace(l, "cluster_" + std::to_string(l));
  out.validate();
  return out;
}

std::vector<std::string> guidance_vocabulary(const NounSet& nouns) {
  std::vector<std::string> names{kBackground};
  for (const auto& n : nouns.nouns)
    if (n != kBackground) names.push_back(n);
  return names;
}

LabelMask segment_with_guidance(const std::string& image_ref, const NounSet& nouns, SegmentorClient& segmentor) {
  const auto names = guidance_vocabulary(nouns);
  if (names.size() < 2) throw GuidanceError("segment_with_guidance: no class names to guide the segmentor");
  if (names.size() > 255) throw GuidanceError("segment_with_guidance: more than 254 class names do not fit a PGM mask");
  SegmentorResponse resp = segmentor.segment(image_ref, names);

  LabelMask mask;
  mask.height = resp.height;
  mask.width = resp.width;
  mask.labels = std::move(resp.labels);
  for (std::size_t i = 0; i < names.size(); ++i) mask.vocabulary[static_cast<int>(i)] = names[i];
  for (const auto& [idx, name] : resp.vocabulary) {
    auto it = mask.vocabulary.find(idx);
    if (it == mask.vocabulary.end() || it->second != name)
      throw TransportError("segmentor vocabulary disagrees with the requested class list at index " +
                           std::to_string(idx));
  }
  try {
    mask.validate();
  } catch (const ValidationError& e) {
    throw TransportError(std::string("segmentor returned an invalid mask: ") + e.what());
  }
  return mask;
}

}  // namespace selfseg
