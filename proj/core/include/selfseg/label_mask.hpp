#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace selfseg {

/// Per-pixel class indices bound to class names.
struct LabelMask {
  static constexpr int kDefaultIgnore = 255;

  int height = 0;
  int width = 0;
  std::vector<int> labels;  // row-major
  std::map<int, std::string> vocabulary;
  int ignore_index = kDefaultIgnore;

  int at(int row, int col) const { return labels[static_cast<std::size_t>(row) * width + col]; }

  /// Every non-ignore label named, names unique.
  void validate() const;
  /// Index of `name` in the vocabulary, or -1.
  int index_of(std::string_view name) const;

  bool operator==(const LabelMask&) const = default;
};

/// Binary PGM (P5, maxval 255) codec for label rasters.
/// `comment` (single line, without '#') is written into the header.
std::string encode_pgm(int height, int width, const std::vector<int>& labels, std::string_view comment = {});
void decode_pgm(std::string_view bytes, int& height, int& width, std::vector<int>& labels);

/// `{"ignore_index":255,"names":{"0":"background",...}}`
std::string vocab_to_json(const LabelMask& mask, std::string_view config_hash = {});
void vocab_from_json(std::string_view json, LabelMask& mask);

/// Writes `<path>` (PGM) and the `<stem>.vocab.json` sidecar next to it. A
/// non-empty config hash is embedded in both files.
void write_label_mask(const std::filesystem::path& pgm_path, const LabelMask& mask, std::string_view config_hash = {});
LabelMask read_label_mask(const std::filesystem::path& pgm_path);
std::filesystem::path vocab_sidecar_path(const std::filesystem::path& pgm_path);

}  // namespace selfseg
