#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "selfseg/errors.hpp"
#include "selfseg/label_mask.hpp"
#include "selfseg/noun_filter.hpp"

namespace selfseg {

struct ChatMessage {
  std::string role;
  std::string content;
  bool operator==(const ChatMessage&) const = default;
};
using Dialog = std::vector<ChatMessage>;

/// Chat LLM answering a batch of independent dialogs; responses are aligned
/// with the dialogs by index.
class LlmClient {
 public:
  virtual ~LlmClient() = default;
  virtual std::vector<std::string> generate(const std::vector<Dialog>& dialogs) = 0;
};

/// Prompt with placeholders. ExplicitVocabulary templates name the noun as
/// <name> and list the classes in <dataset>; DatasetName templates use
/// <noun> and rely on the model knowing the dataset.
struct PromptTemplate {
  enum class Mode { ExplicitVocabulary, DatasetName };

  std::string text;
  Mode mode = Mode::ExplicitVocabulary;

  void validate() const;
  std::string render(std::string_view noun, const std::vector<std::string>& vocabulary) const;

  /// Loads `<dir>/voc_cityscapes.txt` or `<dir>/ade20k.txt` for a dataset key
  /// (voc, cityscapes, ade20k). `custom` uses the explicit template.
  static PromptTemplate for_dataset(const std::filesystem::path& dir, std::string_view dataset);
  static PromptTemplate load(const std::filesystem::path& path, Mode mode);
};

/// `['a', 'b', 'c']`
std::string format_class_list(const std::vector<std::string>& vocabulary);

std::vector<Dialog> generate_dialogs(const std::vector<std::string>& batch, const PromptTemplate& tmpl,
                                     const std::vector<std::string>& vocabulary);

/// First single-quoted substring, trimmed and lowercased; nullopt if none.
std::optional<std::string> parse_response(std::string_view response);

struct MappingDict {
  std::map<std::string, std::string> map;  // noun -> dataset class or "background"
  std::set<std::string> skipped_resolved;  // nouns that fell through to background

  bool operator==(const MappingDict&) const = default;
};

class LoveTransportError : public TransportError {
 public:
  LoveTransportError(const std::string& what, MappingDict partial)
      : TransportError(what), partial_(std::move(partial)) {}
  const MappingDict& partial() const noexcept { return partial_; }

 private:
  MappingDict partial_;
};

struct LoveOptions {
  int batch_size = 8;
  int max_in_flight = 1;
};

/// Noun -> dataset class mapping built with the LLM mapper procedure:
/// query the LLM per batch, intersect each parsed answer with the vocabulary,
/// then force identity for nouns already in the vocabulary and send every
/// still-skipped noun to "background".
MappingDict build_mapping(const std::vector<std::string>& nouns, const std::vector<std::string>& vocabulary,
                          const PromptTemplate& tmpl, const LoveOptions& options, LlmClient& llm);

/// Rewrites predicted pixels through `mapping` into indices of `target_vocab`
/// (which must contain every mapping target). Ignore pixels are kept.
LabelMask remap_mask(const LabelMask& pred, const MappingDict& mapping, const std::vector<std::string>& target_vocab);

}  // namespace selfseg
