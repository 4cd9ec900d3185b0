#include <bit>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "selfseg/clients.hpp"
#include "selfseg/rng.hpp"

namespace selfseg {
namespace {

nlohmann::json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw NotFoundError("cannot open fixture " + path.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("fixture " + path.string() + ": " + e.what());
  }
}

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw NotFoundError("cannot open fixture " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

std::uint64_t hash_subset(const EmbeddingSubset& embeddings) {
  std::uint64_t h = combine_keys(0x5e1f5e6ULL, embeddings.size());
  for (const auto& v : embeddings) {
    h = combine_keys(h, v.size());
    for (float f : v) h = combine_keys(h, std::bit_cast<std::uint32_t>(f));
  }
  return h;
}

MockDecoderClient::MockDecoderClient(std::vector<std::string> captions) : captions_(std::move(captions)) {
  if (captions_.empty()) throw ValidationError("mock decoder: caption table is empty");
}

MockDecoderClient MockDecoderClient::from_file(const std::filesystem::path& path) {
  try {
    return MockDecoderClient(read_json(path).at("captions").get<std::vector<std::string>>());
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("mock decoder fixture: " + std::string(e.what()));
  }
}

std::string MockDecoderClient::caption(const EmbeddingSubset& embeddings, const DecodeParams& params) {
  const std::uint64_t key = combine_keys(hash_subset(embeddings), params.seed);
  return captions_[static_cast<std::size_t>(key % captions_.size())];
}

MockSegmentorClient::MockSegmentorClient(std::filesystem::path fixture_dir) : dir_(std::move(fixture_dir)) {}

SegmentorResponse MockSegmentorClient::segment(const std::string& image_path,
                                               const std::vector<std::string>& class_names) {
  const std::string stem = std::filesystem::path(image_path).stem().string();
  const auto spec = read_json(dir_ / (stem + ".json"));
  SegmentorResponse out;
  std::vector<int> regions;
  decode_pgm(slurp(dir_ / spec.at("mask").get<std::string>()), out.height, out.width, regions);

  std::map<int, int> region_class;
  for (const auto& [key, names] : spec.at("regions").items()) {
    int chosen = 0;
    for (const auto& n : names) {
      auto it = std::find(class_names.begin(), class_names.end(), n.get<std::string>());
      if (it != class_names.end()) {
        chosen = static_cast<int>(it - class_names.begin());
        break;
      }
    }
    region_class[std::stoi(key)] = chosen;
  }
  out.labels.resize(regions.size());
  for (std::size_t i = 0; i < regions.size(); ++i) {
    auto it = region_class.find(regions[i]);
    out.labels[i] = it == region_class.end() ? 0 : it->second;
  }
  for (std::size_t i = 0; i < class_names.size(); ++i) out.vocabulary[static_cast<int>(i)] = class_names[i];
  return out;
}

MockLlmClient::MockLlmClient(std::vector<Rule> rules, std::string default_response)
    : rules_(std::move(rules)), default_(std::move(default_response)) {}

MockLlmClient MockLlmClient::from_file(const std::filesystem::path& path) {
  const auto j = read_json(path);
  std::vector<Rule> rules;
  try {
    for (const auto& r : j.at("rules"))
      rules.push_back({r.at("contains").get<std::string>(), r.at("response").get<std::string>()});
    return MockLlmClient(std::move(rules), j.value("default", std::string("'background'")));
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("mock llm fixture: " + std::string(e.what()));
  }
}

std::vector<std::string> MockLlmClient::generate(const std::vector<Dialog>& dialogs) {
  std::vector<std::string> out;
  out.reserve(dialogs.size());
  for (const auto& d : dialogs) {
    const std::string& content = d.empty() ? std::string() : d.back().content;
    std::string response = default_;
    for (const auto& r : rules_)
      if (content.find(r.contains) != std::string::npos) {
        response = r.response;
        break;
      }
    out.push_back(std::move(response));
  }
  return out;
}

}  // namespace selfseg
