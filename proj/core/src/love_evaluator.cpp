#include "selfseg/love_evaluator.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <future>
#include <sstream>

#include "selfseg/guidance.hpp"

namespace selfseg {
namespace {

void replace_all(std::string& s, std::string_view from, std::string_view to) {
  std::size_t pos = 0;
  while ((pos = s.find(from, pos)) != std::string::npos) {
    s.replace(pos, from.size(), to);
    pos += to.size();
  }
}

std::string trim_lower(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  std::string out(s.substr(first, last - first + 1));
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

// Vocabulary entries named by the answer, in vocabulary order. An answer may
// name several classes separated by commas.
std::vector<std::string> intersect(const std::optional<std::string>& answer, const std::vector<std::string>& vocabulary) {
  if (!answer) return {};
  std::set<std::string> candidates;
  std::stringstream ss(*answer);
  std::string part;
  while (std::getline(ss, part, ',')) candidates.insert(trim_lower(part));
  std::vector<std::string> common;
  for (const auto& v : vocabulary)
    if (candidates.count(v)) common.push_back(v);
  return common;
}

}  // namespace

void PromptTemplate::validate() const {
  const bool has_dataset = text.find("<dataset>") != std::string::npos;
  if (mode == Mode::ExplicitVocabulary) {
    if (text.find("<name>") == std::string::npos || !has_dataset)
      throw ValidationError("prompt template: explicit-vocabulary template needs <name> and <dataset>");
  } else if (text.find("<noun>") == std::string::npos) {
    throw ValidationError("prompt template: dataset-name template needs <noun>");
  }
}

std::string format_class_list(const std::vector<std::string>& vocabulary) {
  std::string out = "[";
  for (std::size_t i = 0; i < vocabulary.size(); ++i) {
    if (i) out += ", ";
    out += "'" + vocabulary[i] + "'";
  }
  return out + "]";
}

std::string PromptTemplate::render(std::string_view noun, const std::vector<std::string>& vocabulary) const {
  std::string out = text;
  replace_all(out, "<name>", noun);
  replace_all(out, "<noun>", noun);
  if (mode == Mode::ExplicitVocabulary) replace_all(out, "<dataset>", format_class_list(vocabulary));
  return out;
}

PromptTemplate PromptTemplate::load(const std::filesystem::path& path, Mode mode) {
  std::ifstream in(path);
  if (!in) throw NotFoundError("prompt template: cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  PromptTemplate t{ss.str(), mode};
  while (!t.text.empty() && (t.text.back() == '\n' || t.text.back() == '\r')) t.text.pop_back();
  t.validate();
  return t;
}

PromptTemplate PromptTemplate::for_dataset(const std::filesystem::path& dir, std::string_view dataset) {
  if (dataset == "ade20k") return load(dir / "ade20k.txt", Mode::DatasetName);
  if (dataset == "voc" || dataset == "cityscapes" || dataset == "custom")
    return load(dir / "voc_cityscapes.txt", Mode::ExplicitVocabulary);
  throw ConfigError("unknown dataset '" + std::string(dataset) + "'");
}

std::vector<Dialog> generate_dialogs(const std::vector<std::string>& batch, const PromptTemplate& tmpl,
                                     const std::vector<std::string>& vocabulary) {
  std::vector<Dialog> dialogs;
  dialogs.reserve(batch.size());
  for (const auto& noun : batch) dialogs.push_back({ChatMessage{"user", tmpl.render(noun, vocabulary)}});
  return dialogs;
}

std::optional<std::string> parse_response(std::string_view response) {
  const auto open = response.find('\'');
  if (open == std::string_view::npos) return std::nullopt;
  const auto close = response.find('\'', open + 1);
  if (close == std::string_view::npos) return std::nullopt;
  std::string answer = trim_lower(response.substr(open + 1, close - open - 1));
  if (answer.empty()) return std::nullopt;
  return answer;
}

MappingDict build_mapping(const std::vector<std::string>& nouns, const std::vector<std::string>& vocabulary,
                          const PromptTemplate& tmpl, const LoveOptions& options, LlmClient& llm) {
  if (vocabulary.empty()) throw ValidationError("build_mapping: empty dataset vocabulary");
  if (options.batch_size < 1) throw ValidationError("build_mapping: batch size must be >= 1");
  tmpl.validate();

  std::vector<std::vector<std::string>> batches;
  for (std::size_t i = 0; i < nouns.size(); i += static_cast<std::size_t>(options.batch_size))
    batches.emplace_back(nouns.begin() + static_cast<std::ptrdiff_t>(i),
                         nouns.begin() + static_cast<std::ptrdiff_t>(std::min(nouns.size(), i + static_cast<std::size_t>(options.batch_size))));

  // Query phase. A failed batch stops collection; earlier batches are kept.
  std::vector<std::optional<std::vector<std::string>>> all_responses(batches.size());
  std::string failure;
  auto query = [&](std::size_t b) -> std::optional<std::string> {
    try {
      auto responses = llm.generate(generate_dialogs(batches[b], tmpl, vocabulary));
      if (responses.size() != batches[b].size())
        return "LLM returned " + std::to_string(responses.size()) + " responses for " +
               std::to_string(batches[b].size()) + " dialogs";
      all_responses[b] = std::move(responses);
      return std::nullopt;
    } catch (const TransportError& e) {
      return std::string(e.what());
    }
  };
  if (options.max_in_flight <= 1) {
    for (std::size_t b = 0; b < batches.size() && failure.empty(); ++b)
      if (auto err = query(b)) failure = *err;
  } else {
    std::vector<std::future<std::optional<std::string>>> pending;
    for (std::size_t b = 0; b < batches.size(); ++b) {
      pending.push_back(std::async(std::launch::async, query, b));
      if (pending.size() == static_cast<std::size_t>(options.max_in_flight) || b + 1 == batches.size()) {
        for (auto& f : pending)
          if (auto err = f.get(); err && failure.empty()) failure = *err;
        pending.clear();
      }
    }
  }

  // Dictionary assembly in noun order over the collected responses.
  MappingDict dict;
  std::set<std::string> skipped;
  for (std::size_t b = 0; b < batches.size(); ++b) {
    if (!all_responses[b]) continue;
    for (std::size_t i = 0; i < batches[b].size(); ++i) {
      const std::string& noun = batches[b][i];
      const auto common = intersect(parse_response((*all_responses[b])[i]), vocabulary);
      // updateDict / updateSkipped, last write wins.
      dict.map[noun] = common.empty() ? std::string(kBackground) : common.front();
      if (common.empty())
        skipped.insert(noun);
      else
        skipped.erase(noun);
    }
  }
  const std::set<std::string> vocab_set(vocabulary.begin(), vocabulary.end());
  for (auto& [key, value] : dict.map) {
    if (!vocab_set.count(key)) continue;
    value = key;
    skipped.erase(key);
  }
  for (const auto& key : skipped) {
    dict.map[key] = kBackground;
    dict.skipped_resolved.insert(key);
  }

  if (!failure.empty()) throw LoveTransportError("LLM request failed: " + failure, std::move(dict));
  return dict;
}

LabelMask remap_mask(const LabelMask& pred, const MappingDict& mapping, const std::vector<std::string>& target_vocab) {
  pred.validate();
  std::map<std::string, int> target_index;
  for (std::size_t i = 0; i < target_vocab.size(); ++i)
    if (!target_index.emplace(target_vocab[i], static_cast<int>(i)).second)
      throw ValidationError("remap_mask: duplicate target class '" + target_vocab[i] + "'");
  if (target_vocab.size() > 255) throw ValidationError("remap_mask: target vocabulary too large");

  std::map<int, int> index_map;
  for (const auto& [idx, name] : pred.vocabulary) {
    std::string target;
    if (auto it = mapping.map.find(name); it != mapping.map.end())
      target = it->second;
    else if (name == kBackground || target_index.count(name))
      target = name;  // already a dataset class
    else
      throw ValidationError("remap_mask: class '" + name + "' has no mapping");
    auto t = target_index.find(target);
    if (t == target_index.end())
      throw ValidationError("remap_mask: mapping target '" + target + "' is not in the target vocabulary");
    index_map[idx] = t->second;
  }

  LabelMask out;
  out.height = pred.height;
  out.width = pred.width;
  out.ignore_index = pred.ignore_index;
  out.labels.resize(pred.labels.size());
  for (std::size_t i = 0; i < pred.labels.size(); ++i) {
    const int l = pred.labels[i];
    out.labels[i] = l == pred.ignore_index ? l : index_map.at(l);
  }
  for (std::size_t i = 0; i < target_vocab.size(); ++i) out.vocabulary[static_cast<int>(i)] = target_vocab[i];
  out.validate();
  return out;
}

}  // namespace selfseg
