#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "selfseg/caption_engine.hpp"

namespace selfseg {

/// Noun lemmas and irregular plurals from WordNet `index.noun` / `noun.exc`.
class NounDictionary {
 public:
  NounDictionary() = default;
  NounDictionary(std::unordered_set<std::string> entries, std::unordered_map<std::string, std::string> exceptions);

  /// Loads `index.noun` and `noun.exc` from `dir`. Throws NotFoundError when
  /// either file is missing and ValidationError when no entries were read.
  static NounDictionary load(const std::filesystem::path& dir);
  static NounDictionary parse(std::string_view index_noun, std::string_view noun_exc);

  bool contains(std::string_view lemma) const { return entries_.count(std::string(lemma)) > 0; }
  /// Lemma for an irregular inflection, or nullptr.
  const std::string* exception(std::string_view word) const;

  std::size_t size() const noexcept { return entries_.size(); }
  const std::unordered_set<std::string>& entries() const noexcept { return entries_; }
  const std::unordered_map<std::string, std::string>& exceptions() const noexcept { return exceptions_; }

 private:
  std::unordered_set<std::string> entries_;
  std::unordered_map<std::string, std::string> exceptions_;
};

/// Singular form of `word`: exception list first, then the word itself if it
/// is a dictionary noun, then the detachment rules
/// s->, ses->s, xes->x, zes->z, ches->ch, shes->sh, men->man, ies->y
/// (first candidate in the dictionary). Falls back to `word`.
std::string lemmatize(std::string_view word, const NounDictionary& dict);

/// Lowercased alphabetic tokens.
std::vector<std::string> tokenize(std::string_view text);

/// Part-of-speech tagger reduced to the one question the filter needs.
class PosTagger {
 public:
  virtual ~PosTagger() = default;
  /// One flag per token: true when the token is used as a noun.
  virtual std::vector<bool> noun_flags(const std::vector<std::string>& tokens) const = 0;
};

/// Tags a token as a noun when its lemma is a dictionary noun and the token
/// is not a function word.
class DictionaryTagger : public PosTagger {
 public:
  explicit DictionaryTagger(const NounDictionary& dict);
  std::vector<bool> noun_flags(const std::vector<std::string>& tokens) const override;

  static const std::unordered_set<std::string>& stop_words();

 private:
  const NounDictionary* dict_;
};

/// Deduplicated nouns in first-seen order with occurrence counts.
struct NounSet {
  std::vector<std::string> nouns;
  std::map<std::string, int> source_counts;

  bool contains(std::string_view noun) const;
  /// Appends `noun` (or bumps its count). Throws ValidationError if the noun
  /// is not in `dict`.
  void add(const std::string& noun, const NounDictionary& dict);

  bool operator==(const NounSet&) const = default;
};

NounSet extract_nouns(const std::vector<CaptionRecord>& records, const NounDictionary& dict, const PosTagger& tagger);

}  // namespace selfseg
