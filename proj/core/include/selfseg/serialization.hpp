#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "selfseg/caption_engine.hpp"
#include "selfseg/cluster_assignment.hpp"
#include "selfseg/consensus.hpp"
#include "selfseg/denoise.hpp"
#include "selfseg/eval_metrics.hpp"
#include "selfseg/love_evaluator.hpp"
#include "selfseg/noun_filter.hpp"

// JSON codecs for the stage artifacts. Output is deterministic: object keys
// are emitted in a fixed order and doubles with round-trip precision.
namespace selfseg {

std::string to_json(const ClusterAssignment& a);
ClusterAssignment assignment_from_json(std::string_view json);

std::string to_json(const std::vector<ClusterAssignment>& runs);
std::vector<ClusterAssignment> assignments_from_json(std::string_view json);

std::string to_json(const ClusterProbabilityField& field);
ClusterProbabilityField field_from_json(std::string_view json);

std::string to_json(const DenoisedGrid& grid);
DenoisedGrid denoised_from_json(std::string_view json);

std::string to_json(const CaptionBatch& batch);
CaptionBatch captions_from_json(std::string_view json);

std::string to_json(const NounSet& nouns);
NounSet nouns_from_json(std::string_view json);

std::string to_json(const MappingDict& mapping);
MappingDict mapping_from_json(std::string_view json);

std::string to_json(const IouReport& report);
std::string to_json(const CmIouReport& report);

/// `image_id,kind,key,iou` rows (no header) for plotting.
std::string to_csv_rows(const std::string& image_id, const IouReport& report);
std::string to_csv_rows(const std::string& image_id, const CmIouReport& report);

}  // namespace selfseg
