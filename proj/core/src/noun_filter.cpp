#include "selfseg/noun_filter.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <fstream>
#include <sstream>

#include "selfseg/errors.hpp"

namespace selfseg {
namespace {

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw NotFoundError("wordnet: cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

template <typename Fn>
void for_each_line(std::string_view text, Fn&& fn) {
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    fn(text.substr(pos, end - pos));
    pos = end + 1;
  }
}

std::string_view first_field(std::string_view line, std::size_t* rest = nullptr) {
  auto end = line.find_first_of(" \t\r");
  if (end == std::string_view::npos) end = line.size();
  if (rest) *rest = end;
  return line.substr(0, end);
}

struct Rule {
  std::string_view suffix;
  std::string_view replacement;
};

constexpr std::array<Rule, 8> kNounRules{{{"s", ""},
                                          {"ses", "s"},
                                          {"xes", "x"},
                                          {"zes", "z"},
                                          {"ches", "ch"},
                                          {"shes", "sh"},
                                          {"men", "man"},
                                          {"ies", "y"}}};

}  // namespace

NounDictionary::NounDictionary(std::unordered_set<std::string> entries,
                               std::unordered_map<std::string, std::string> exceptions)
    : entries_(std::move(entries)), exceptions_(std::move(exceptions)) {}

NounDictionary NounDictionary::parse(std::string_view index_noun, std::string_view noun_exc) {
  std::unordered_set<std::string> entries;
  for_each_line(index_noun, [&](std::string_view line) {
    // The license preamble lines start with spaces.
    if (line.empty() || line.front() == ' ') return;
    entries.emplace(first_field(line));
  });
  std::unordered_map<std::string, std::string> exceptions;
  for_each_line(noun_exc, [&](std::string_view line) {
    std::size_t rest = 0;
    auto inflected = first_field(line, &rest);
    if (inflected.empty()) return;
    auto tail = line.substr(rest);
    tail.remove_prefix(std::min(tail.find_first_not_of(" \t"), tail.size()));
    auto lemma = first_field(tail);
    if (lemma.empty()) return;
    // Keep the first lemma listed for an inflection.
    exceptions.emplace(std::string(inflected), std::string(lemma));
  });
  if (entries.empty()) throw ValidationError("wordnet: noun index is empty");
  return NounDictionary(std::move(entries), std::move(exceptions));
}

NounDictionary NounDictionary::load(const std::filesystem::path& dir) {
  return parse(read_file(dir / "index.noun"), read_file(dir / "noun.exc"));
}

const std::string* NounDictionary::exception(std::string_view word) const {
  auto it = exceptions_.find(std::string(word));
  return it == exceptions_.end() ? nullptr : &it->second;
}

std::string lemmatize(std::string_view word, const NounDictionary& dict) {
  if (const std::string* irregular = dict.exception(word)) return *irregular;
  if (dict.contains(word)) return std::string(word);
  for (const Rule& rule : kNounRules) {
    if (word.size() <= rule.suffix.size() || !word.ends_with(rule.suffix)) continue;
    std::string candidate(word.substr(0, word.size() - rule.suffix.size()));
    candidate += rule.replacement;
    if (dict.contains(candidate)) return candidate;
  }
  return std::string(word);
}

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string cur;
  for (char ch : text) {
    const auto c = static_cast<unsigned char>(ch);
    if (std::isalpha(c)) {
      cur.push_back(static_cast<char>(std::tolower(c)));
    } else if (!cur.empty()) {
      tokens.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) tokens.push_back(std::move(cur));
  return tokens;
}

DictionaryTagger::DictionaryTagger(const NounDictionary& dict) : dict_(&dict) {}

const std::unordered_set<std::string>& DictionaryTagger::stop_words() {
  static const std::unordered_set<std::string> words{
      "a",     "an",    "the",   "and",  "or",    "but",  "of",   "in",    "on",   "at",    "to",
      "for",   "with",  "by",    "from", "up",    "down", "over", "under", "into", "onto",  "near",
      "is",    "are",   "was",   "were", "be",    "been", "being", "it",   "its",  "this",  "that",
      "these", "those", "there", "here", "some",  "two",  "three", "one",  "his",  "her",   "their",
      "he",    "she",   "they",  "we",   "as",    "next", "while", "other", "very", "out",  "off"};
  return words;
}

std::vector<bool> DictionaryTagger::noun_flags(const std::vector<std::string>& tokens) const {
  std::vector<bool> flags;
  flags.reserve(tokens.size());
  for (const auto& t : tokens) {
    flags.push_back(!stop_words().count(t) && dict_->contains(lemmatize(t, *dict_)));
  }
  return flags;
}

bool NounSet::contains(std::string_view noun) const {
  return source_counts.count(std::string(noun)) > 0;
}

void NounSet::add(const std::string& noun, const NounDictionary& dict) {
  if (!dict.contains(noun)) throw ValidationError("noun set: '" + noun + "' is not a dictionary noun");
  auto [it, inserted] = source_counts.emplace(noun, 0);
  ++it->second;
  if (inserted) nouns.push_back(noun);
}

NounSet extract_nouns(const std::vector<CaptionRecord>& records, const NounDictionary& dict, const PosTagger& tagger) {
  NounSet out;
  for (const auto& rec : records) {
    const auto tokens = tokenize(rec.text);
    const auto flags = tagger.noun_flags(tokens);
    for (std::size_t i = 0; i < tokens.size(); ++i) {
      if (!flags[i]) continue;
      std::string lemma = lemmatize(tokens[i], dict);
      if (dict.contains(lemma)) out.add(lemma, dict);
    }
  }
  return out;
}

}  // namespace selfseg
