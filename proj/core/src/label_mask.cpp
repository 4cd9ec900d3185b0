#include "selfseg/label_mask.hpp"

#include <cctype>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "selfseg/errors.hpp"

namespace selfseg {
namespace {

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw NotFoundError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void spit(const std::filesystem::path& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ValidationError("cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

}  // namespace

void LabelMask::validate() const {
  if (height <= 0 || width <= 0) throw ValidationError("label mask: non-positive size");
  if (labels.size() != static_cast<std::size_t>(height) * width)
    throw ValidationError("label mask: label count does not match size");
  std::set<std::string> names;
  for (const auto& [idx, name] : vocabulary) {
    if (idx == ignore_index) throw ValidationError("label mask: ignore index has a vocabulary entry");
    if (!names.insert(name).second) throw ValidationError("label mask: duplicate class name '" + name + "'");
  }
  for (int l : labels) {
    if (l == ignore_index) continue;
    if (!vocabulary.count(l)) throw ValidationError("label mask: label " + std::to_string(l) + " has no name");
  }
}

int LabelMask::index_of(std::string_view name) const {
  for (const auto& [idx, n] : vocabulary)
    if (n == name) return idx;
  return -1;
}

std::string encode_pgm(int height, int width, const std::vector<int>& labels, std::string_view comment) {
  if (labels.size() != static_cast<std::size_t>(height) * width) throw ValidationError("pgm: size mismatch");
  if (comment.find('\n') != std::string_view::npos) throw ValidationError("pgm: comment must be one line");
  std::string out = "P5\n";
  if (!comment.empty()) out += "# " + std::string(comment) + "\n";
  out += std::to_string(width) + " " + std::to_string(height) + "\n255\n";
  out.reserve(out.size() + labels.size());
  for (int l : labels) {
    if (l < 0 || l > 255) throw ValidationError("pgm: label " + std::to_string(l) + " does not fit in 8 bits");
    out.push_back(static_cast<char>(static_cast<unsigned char>(l)));
  }
  return out;
}

void decode_pgm(std::string_view bytes, int& height, int& width, std::vector<int>& labels) {
  std::size_t pos = 0;
  auto skip_ws = [&] {
    while (pos < bytes.size()) {
      if (bytes[pos] == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      } else if (std::isspace(static_cast<unsigned char>(bytes[pos]))) {
        ++pos;
      } else {
        break;
      }
    }
  };
  auto read_int = [&]() {
    skip_ws();
    long long v = 0;
    const std::size_t start = pos;
    while (pos < bytes.size() && std::isdigit(static_cast<unsigned char>(bytes[pos]))) v = v * 10 + (bytes[pos++] - '0');
    if (pos == start || v > (1 << 24)) throw ValidationError("pgm: malformed header");
    return static_cast<int>(v);
  };
  if (bytes.substr(0, 2) != "P5") throw ValidationError("pgm: not a binary PGM (P5)");
  pos = 2;
  width = read_int();
  height = read_int();
  const int maxval = read_int();
  if (maxval != 255) throw ValidationError("pgm: only maxval 255 is supported");
  if (pos >= bytes.size() || !std::isspace(static_cast<unsigned char>(bytes[pos])))
    throw ValidationError("pgm: malformed header");
  ++pos;
  const std::size_t n = static_cast<std::size_t>(height) * width;
  if (bytes.size() - pos != n) throw ValidationError("pgm: pixel payload size mismatch");
  labels.resize(n);
  for (std::size_t i = 0; i < n; ++i) labels[i] = static_cast<unsigned char>(bytes[pos + i]);
}

std::string vocab_to_json(const LabelMask& mask, std::string_view config_hash) {
  nlohmann::ordered_json names = nlohmann::ordered_json::object();
  for (const auto& [idx, name] : mask.vocabulary) names[std::to_string(idx)] = name;
  nlohmann::ordered_json j;
  if (!config_hash.empty()) j["config_hash"] = config_hash;
  j["ignore_index"] = mask.ignore_index;
  j["names"] = names;
  return j.dump();
}

void vocab_from_json(std::string_view json, LabelMask& mask) {
  try {
    const auto j = nlohmann::json::parse(json);
    mask.ignore_index = j.value("ignore_index", LabelMask::kDefaultIgnore);
    mask.vocabulary.clear();
    for (const auto& [key, value] : j.at("names").items()) mask.vocabulary[std::stoi(key)] = value.get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("vocab json: ") + e.what());
  } catch (const std::logic_error& e) {
    throw ValidationError(std::string("vocab json: bad index: ") + e.what());
  }
}

std::filesystem::path vocab_sidecar_path(const std::filesystem::path& pgm_path) {
  auto p = pgm_path;
  p.replace_extension(".vocab.json");
  return p;
}

void write_label_mask(const std::filesystem::path& pgm_path, const LabelMask& mask, std::string_view config_hash) {
  mask.validate();
  const std::string comment = config_hash.empty() ? std::string() : "config_hash " + std::string(config_hash);
  spit(pgm_path, encode_pgm(mask.height, mask.width, mask.labels, comment));
  spit(vocab_sidecar_path(pgm_path), vocab_to_json(mask, config_hash) + "\n");
}

LabelMask read_label_mask(const std::filesystem::path& pgm_path) {
  LabelMask mask;
  decode_pgm(slurp(pgm_path), mask.height, mask.width, mask.labels);
  vocab_from_json(slurp(vocab_sidecar_path(pgm_path)), mask);
  mask.validate();
  return mask;
}

}  // namespace selfseg
