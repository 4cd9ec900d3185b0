#include <gtest/gtest.h>

#include "selfseg/clients.hpp"
#include "selfseg/love_evaluator.hpp"
#include "test_support.hpp"

using namespace selfseg;

namespace {

const std::vector<std::string> kVoc{"aeroplane", "bicycle", "bird", "boat", "bottle", "bus", "car", "cat",
                                    "chair", "cow", "dining table", "dog", "horse", "motorbike", "person",
                                    "potted plant", "sheep", "sofa", "train", "tv monitor"};

PromptTemplate voc_template() {
  return PromptTemplate::for_dataset(support::repo_data_dir() / "prompts", "voc");
}

/// Answers from a noun -> response table; counts calls and batch sizes.
class TableLlm : public LlmClient {
 public:
  TableLlm() = default;
  explicit TableLlm(std::map<std::string, std::string> table) : table_(std::move(table)) {}
  std::vector<std::string> generate(const std::vector<Dialog>& dialogs) override {
    batch_sizes.push_back(dialogs.size());
    std::vector<std::string> out;
    for (const auto& d : dialogs) {
      std::string resp = "'background'";
      for (const auto& [noun, r] : table_)
        if (d.back().content.find("\n" + noun + " exclusively") != std::string::npos) resp = r;
      out.push_back(resp);
    }
    if (fail_after >= 0 && static_cast<int>(batch_sizes.size()) > fail_after) throw TransportError("llm down");
    return out;
  }
  std::vector<std::size_t> batch_sizes;
  int fail_after = -1;

 private:
  std::map<std::string, std::string> table_;
};

}  // namespace

TEST(PromptTemplate, StoredTemplatesLoadAndValidate) {
  const auto voc = voc_template();
  EXPECT_EQ(voc.mode, PromptTemplate::Mode::ExplicitVocabulary);
  EXPECT_EQ(voc.text.rfind("To which class in the list <dataset> is ", 0), 0u);
  EXPECT_NE(voc.text.find("'background'"), std::string::npos);
  EXPECT_EQ(voc.text.back(), '.');

  const auto ade = PromptTemplate::for_dataset(support::repo_data_dir() / "prompts", "ade20k");
  EXPECT_EQ(ade.mode, PromptTemplate::Mode::DatasetName);
  EXPECT_NE(ade.text.find("If <noun> "), std::string::npos);
  EXPECT_NE(ade.text.find("'background'"), std::string::npos);

  EXPECT_EQ(PromptTemplate::for_dataset(support::repo_data_dir() / "prompts", "cityscapes").text, voc.text);
  EXPECT_THROW(PromptTemplate::for_dataset(support::repo_data_dir() / "prompts", "coco"), ConfigError);
}

TEST(PromptTemplate, RenderFillsPlaceholders) {
  const auto voc = voc_template();
  const std::string out = voc.render("puppy", {"dog", "cat"});
  EXPECT_EQ(out.find("<name>"), std::string::npos);
  EXPECT_EQ(out.find("<dataset>"), std::string::npos);
  EXPECT_NE(out.find("the list ['dog', 'cat'] is \npuppy exclusively"), std::string::npos);
  EXPECT_NE(out.find("If \npuppy is not"), std::string::npos);

  const PromptTemplate ade{"map <noun> please", PromptTemplate::Mode::DatasetName};
  EXPECT_EQ(ade.render("tree", kVoc), "map tree please");
}

TEST(PromptTemplate, ValidateRejectsMissingPlaceholders) {
  EXPECT_THROW((PromptTemplate{"no <name> here", PromptTemplate::Mode::ExplicitVocabulary}.validate()),
               ValidationError);
  EXPECT_THROW((PromptTemplate{"no <dataset> here", PromptTemplate::Mode::ExplicitVocabulary}.validate()),
               ValidationError);
  EXPECT_THROW((PromptTemplate{"nothing", PromptTemplate::Mode::DatasetName}.validate()), ValidationError);
  EXPECT_NO_THROW((PromptTemplate{"<name> in <dataset>", PromptTemplate::Mode::ExplicitVocabulary}.validate()));
}

TEST(FormatClassList, QuotedCommaSeparated) {
  EXPECT_EQ(format_class_list({"a", "b"}), "['a', 'b']");
  EXPECT_EQ(format_class_list({}), "[]");
  EXPECT_EQ(format_class_list({"dining table"}), "['dining table']");
}

TEST(GenerateDialogs, OneUserMessagePerNoun) {
  const auto d = generate_dialogs({"dog", "tree"}, voc_template(), kVoc);
  ASSERT_EQ(d.size(), 2u);
  ASSERT_EQ(d[0].size(), 1u);
  EXPECT_EQ(d[0][0].role, "user");
  EXPECT_NE(d[1][0].content.find("\ntree exclusively"), std::string::npos);
}

TEST(ParseResponse, FirstQuotedSubstring) {
  EXPECT_EQ(parse_response("'Dog'"), "dog");
  EXPECT_EQ(parse_response("The answer is 'dining table'. Not 'chair'."), "dining table");
  EXPECT_EQ(parse_response("'  Person '"), "person");
  EXPECT_EQ(parse_response("no quotes"), std::nullopt);
  EXPECT_EQ(parse_response("only 'one quote"), std::nullopt);
  EXPECT_EQ(parse_response("''"), std::nullopt);
}

TEST(BuildMapping, AllFourBranches) {
  TableLlm llm({{"puppy", "'dog'"},
                {"cloud", "'nebula'"},
                {"dog", "'cat'"},  // identity must win for vocabulary nouns
                {"vehicle", "'car, bus'"},
                {"gadget", "I cannot say"}});
  const auto m = build_mapping({"dog", "puppy", "cloud", "vehicle", "gadget"}, kVoc, voc_template(), {}, llm);
  EXPECT_EQ(m.map.at("dog"), "dog");
  EXPECT_EQ(m.map.at("puppy"), "dog");
  EXPECT_EQ(m.map.at("cloud"), "background");
  EXPECT_EQ(m.map.at("vehicle"), "bus");  // first hit in vocabulary order
  EXPECT_EQ(m.map.at("gadget"), "background");
  EXPECT_EQ(m.skipped_resolved, (std::set<std::string>{"cloud", "gadget"}));
}

TEST(BuildMapping, BatchesAndEmptyInput) {
  std::vector<std::string> nouns;
  for (int i = 0; i < 19; ++i) nouns.push_back("thing" + std::to_string(i));
  TableLlm llm;
  LoveOptions opt;
  opt.batch_size = 8;
  const auto m = build_mapping(nouns, kVoc, voc_template(), opt, llm);
  EXPECT_EQ(llm.batch_sizes, (std::vector<std::size_t>{8, 8, 3}));
  EXPECT_EQ(m.map.size(), 19u);

  TableLlm idle;
  EXPECT_TRUE(build_mapping({}, kVoc, voc_template(), opt, idle).map.empty());
  EXPECT_TRUE(idle.batch_sizes.empty());

  opt.batch_size = 0;
  EXPECT_THROW(build_mapping(nouns, kVoc, voc_template(), opt, idle), ValidationError);
  opt.batch_size = 1;
  EXPECT_THROW(build_mapping(nouns, {}, voc_template(), opt, idle), ValidationError);
}

TEST(BuildMapping, ConcurrentBatchesGiveSameResult) {
  std::vector<std::string> nouns{"puppy", "dog", "cloud", "vehicle", "man", "taxi", "couch", "bike", "tree"};
  std::map<std::string, std::string> table{{"puppy", "'dog'"},   {"vehicle", "'car, bus'"}, {"man", "'person'"},
                                           {"taxi", "'car'"},    {"couch", "'sofa'"},      {"bike", "'bicycle'"}};
  TableLlm a(table), b(table);
  LoveOptions serial{2, 1}, parallel{2, 4};
  EXPECT_EQ(build_mapping(nouns, kVoc, voc_template(), serial, a),
            build_mapping(nouns, kVoc, voc_template(), parallel, b));
}

TEST(BuildMapping, TransportFailureCarriesPartialDictionary) {
  TableLlm llm(std::map<std::string, std::string>{{"puppy", "'dog'"}});
  llm.fail_after = 1;
  LoveOptions opt;
  opt.batch_size = 1;
  try {
    build_mapping({"puppy", "tree", "cloud"}, kVoc, voc_template(), opt, llm);
    FAIL() << "expected LoveTransportError";
  } catch (const LoveTransportError& e) {
    EXPECT_EQ(e.partial().map.size(), 1u);
    EXPECT_EQ(e.partial().map.at("puppy"), "dog");
  }
}

TEST(BuildMapping, MockLlmFixture) {
  MockLlmClient llm({{"\npuppy exclusively", "'dog'"}, {"\ncloud exclusively", "'nebula'"}}, "'background'");
  const auto m = build_mapping({"puppy", "cloud", "dog"}, kVoc, voc_template(), {}, llm);
  EXPECT_EQ(m.map.at("puppy"), "dog");
  EXPECT_EQ(m.map.at("cloud"), "background");
  EXPECT_EQ(m.map.at("dog"), "dog");
}

TEST(RemapMask, IdentityMergeAndBackground) {
  const std::vector<std::string> target{"background", "dog", "person"};
  MappingDict mapping;
  mapping.map = {{"dog", "dog"}, {"puppy", "dog"}, {"man", "person"}, {"cloud", "background"}};

  LabelMask pred{2, 3, {0, 1, 2, 3, 4, 255}, {{0, "background"}, {1, "dog"}, {2, "puppy"}, {3, "man"}, {4, "cloud"}}};
  const auto out = remap_mask(pred, mapping, target);
  EXPECT_EQ(out.labels, (std::vector<int>{0, 1, 1, 2, 0, 255}));
  EXPECT_EQ(out.vocabulary.at(2), "person");

  LabelMask all_bg{1, 2, {0, 1}, {{0, "background"}, {1, "cloud"}}};
  EXPECT_EQ(remap_mask(all_bg, mapping, target).labels, (std::vector<int>{0, 0}));
}

TEST(RemapMask, Errors) {
  MappingDict mapping;
  mapping.map = {{"puppy", "wolf"}};
  LabelMask unmapped{1, 1, {0}, {{0, "tree"}}};
  EXPECT_THROW(remap_mask(unmapped, mapping, {"background", "dog"}), ValidationError);
  LabelMask bad_target{1, 1, {0}, {{0, "puppy"}}};
  EXPECT_THROW(remap_mask(bad_target, mapping, {"background", "dog"}), ValidationError);
  EXPECT_THROW(remap_mask(bad_target, mapping, {"dog", "dog"}), ValidationError);
}
