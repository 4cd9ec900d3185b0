#include "selfseg/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "selfseg/rng.hpp"

#ifndef SELFSEG_DEFAULT_DATA_DIR
#define SELFSEG_DEFAULT_DATA_DIR "data"
#endif

namespace selfseg {
namespace {

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto a = item.find_first_not_of(" \t");
    const auto b = item.find_last_not_of(" \t");
    if (a != std::string::npos) out.push_back(item.substr(a, b - a + 1));
  }
  return out;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string join(const std::vector<std::string>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + v[i];
  return out;
}

std::string mode_name(PipelineMode m) { return m == PipelineMode::SelfSeg ? "self-seg" : "plain-blip"; }

}  // namespace

std::filesystem::path default_data_dir() {
  if (const char* env = std::getenv("SELFSEG_DATA_DIR"); env && *env) return env;
  return SELFSEG_DEFAULT_DATA_DIR;
}

PipelineConfig default_config() {
  PipelineConfig cfg;
  const auto data = default_data_dir();
  cfg.wordnet_dir = data / "wordnet-3.0";
  cfg.prompts_dir = data / "prompts";
  return cfg;
}

std::filesystem::path vocab_file(const PipelineConfig& cfg) {
  if (!cfg.vocab_path.empty()) return cfg.vocab_path;
  return default_data_dir() / "vocab" / (cfg.dataset + ".txt");
}

std::vector<std::string> load_vocabulary(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw NotFoundError("vocabulary: cannot open " + path.string());
  std::vector<std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto a = line.find_first_not_of(" \t");
    if (a == std::string::npos || line[a] == '#') continue;
    const auto b = line.find_last_not_of(" \t");
    out.push_back(line.substr(a, b - a + 1));
  }
  if (out.empty()) throw ValidationError("vocabulary: " + path.string() + " lists no classes");
  return out;
}

void PipelineConfig::validate() const {
  try {
    clustering.validate();
    crf.validate();
    decode.validate();
  } catch (const ConfigError&) {
    throw;
  } catch (const ValidationError& e) {
    throw ConfigError(e.what());
  }
  if (positional_dim < 0 || (positional_dim > 0 && positional_dim < 4))
    throw ConfigError("positional_dim must be 0 or >= 4");
  if (majority_max_iters < 1) throw ConfigError("majority_max_iters must be >= 1");
  if (n_cycles < 1) throw ConfigError("cycles must be >= 1");
  if (caption_in_flight < 1) throw ConfigError("caption in-flight limit must be >= 1");
  if (image_height <= 0 || image_width <= 0) throw ConfigError("image size must be positive");
  if (llm_batch_size < 1) throw ConfigError("llm_batch_size must be >= 1");
  if (dataset != "voc" && dataset != "ade20k" && dataset != "cityscapes" && dataset != "custom")
    throw ConfigError("dataset must be one of voc, ade20k, cityscapes, custom");
  if (dataset == "custom" && vocab_path.empty()) throw ConfigError("dataset 'custom' needs vocab_path");
  if (mock && (mock_decoder_fixture.empty() || mock_segmentor_dir.empty() || mock_llm_fixture.empty()))
    throw ConfigError("mock mode needs decoder_fixture, segmentor_dir and llm_fixture");
}

std::string PipelineConfig::canonical() const {
  std::vector<std::string> k;
  for (int v : clustering.k_values) k.push_back(std::to_string(v));
  std::ostringstream o;
  o << "clustering.resolutions=" << join(clustering.resolutions) << "\n"
    << "clustering.k_values=" << join(k) << "\n"
    << "clustering.seed=" << clustering.seed << "\n"
    << "clustering.max_iters=" << clustering.max_iters << "\n"
    << "clustering.tol=" << fmt(clustering.tol) << "\n"
    << "clustering.positional_dim=" << positional_dim << "\n"
    << "denoise.smoothness_weight=" << fmt(crf.smoothness_weight) << "\n"
    << "denoise.smoothness_theta=" << fmt(crf.smoothness_theta) << "\n"
    << "denoise.crf_iters=" << crf.n_iters << "\n"
    << "denoise.unary_floor=" << fmt(crf.unary_floor) << "\n"
    << "denoise.majority_max_iters=" << majority_max_iters << "\n"
    << "caption.min_len=" << decode.min_len << "\n"
    << "caption.max_len=" << decode.max_len << "\n"
    << "caption.top_p=" << fmt(decode.top_p) << "\n"
    << "caption.repetition_penalty=" << fmt(decode.repetition_penalty) << "\n"
    << "caption.seed=" << decode.seed << "\n"
    << "caption.cycles=" << n_cycles << "\n"
    << "nouns.wordnet_dir=" << wordnet_dir.generic_string() << "\n"
    << "guide.mode=" << mode_name(mode) << "\n"
    << "guide.image_height=" << image_height << "\n"
    << "guide.image_width=" << image_width << "\n"
    << "evaluate.dataset=" << dataset << "\n"
    << "evaluate.vocab_path=" << vocab_path.generic_string() << "\n"
    << "evaluate.prompts_dir=" << prompts_dir.generic_string() << "\n"
    << "evaluate.llm_batch_size=" << llm_batch_size << "\n"
    << "evaluate.connectivity=" << static_cast<int>(connectivity) << "\n"
    << "mock.enabled=" << (mock ? "true" : "false") << "\n";
  if (mock) {
    o << "mock.decoder_fixture=" << mock_decoder_fixture.generic_string() << "\n"
      << "mock.segmentor_dir=" << mock_segmentor_dir.generic_string() << "\n"
      << "mock.llm_fixture=" << mock_llm_fixture.generic_string() << "\n";
  } else {
    o << "services.decoder_url=" << decoder_endpoint.base_url << "\n"
      << "services.segmentor_url=" << segmentor_endpoint.base_url << "\n"
      << "services.llm_url=" << llm_endpoint.base_url << "\n";
  }
  return o.str();
}

std::string PipelineConfig::hash() const {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(canonical())));
  return buf;
}

PipelineConfig load_config(const std::filesystem::path& ini_path, PipelineConfig cfg) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  try {
    pt::read_ini(ini_path.string(), tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  const auto base = ini_path.parent_path();
  auto path_of = [&](const std::string& v) -> std::filesystem::path {
    std::filesystem::path p(v);
    return p.is_absolute() || v.empty() ? p : base / p;
  };
  try {
    for (const auto& [section, body] : tree) {
      for (const auto& [key, node] : body) {
        const std::string v = node.get_value<std::string>();
        const std::string k = section + "." + key;
        if (k == "clustering.resolutions") cfg.clustering.resolutions = split_list(v);
        else if (k == "clustering.k_values") {
          cfg.clustering.k_values.clear();
          for (const auto& s : split_list(v)) cfg.clustering.k_values.push_back(std::stoi(s));
        } else if (k == "clustering.seed") cfg.clustering.seed = std::stoull(v);
        else if (k == "clustering.max_iters") cfg.clustering.max_iters = std::stoi(v);
        else if (k == "clustering.tol") cfg.clustering.tol = std::stod(v);
        else if (k == "clustering.positional_dim") cfg.positional_dim = std::stoi(v);
        else if (k == "denoise.smoothness_weight") cfg.crf.smoothness_weight = std::stod(v);
        else if (k == "denoise.smoothness_theta") cfg.crf.smoothness_theta = std::stod(v);
        else if (k == "denoise.crf_iters") cfg.crf.n_iters = std::stoi(v);
        else if (k == "denoise.unary_floor") cfg.crf.unary_floor = std::stod(v);
        else if (k == "denoise.majority_max_iters") cfg.majority_max_iters = std::stoi(v);
        else if (k == "caption.min_len") cfg.decode.min_len = std::stoi(v);
        else if (k == "caption.max_len") cfg.decode.max_len = std::stoi(v);
        else if (k == "caption.top_p") cfg.decode.top_p = std::stod(v);
        else if (k == "caption.repetition_penalty") cfg.decode.repetition_penalty = std::stod(v);
        else if (k == "caption.seed") cfg.decode.seed = std::stoull(v);
        else if (k == "caption.cycles") cfg.n_cycles = std::stoi(v);
        else if (k == "caption.max_in_flight") cfg.caption_in_flight = std::stoi(v);
        else if (k == "nouns.wordnet_dir") cfg.wordnet_dir = path_of(v);
        else if (k == "guide.mode") {
          if (v == "self-seg") cfg.mode = PipelineMode::SelfSeg;
          else if (v == "plain-blip") cfg.mode = PipelineMode::PlainCaption;
          else throw ConfigError("guide.mode must be self-seg or plain-blip");
        } else if (k == "guide.image_height") cfg.image_height = std::stoi(v);
        else if (k == "guide.image_width") cfg.image_width = std::stoi(v);
        else if (k == "evaluate.dataset") cfg.dataset = v;
        else if (k == "evaluate.vocab_path") cfg.vocab_path = path_of(v);
        else if (k == "evaluate.prompts_dir") cfg.prompts_dir = path_of(v);
        else if (k == "evaluate.llm_batch_size") cfg.llm_batch_size = std::stoi(v);
        else if (k == "evaluate.connectivity") {
          const int c = std::stoi(v);
          if (c != 4 && c != 8) throw ConfigError("evaluate.connectivity must be 4 or 8");
          cfg.connectivity = c == 4 ? Connectivity::Four : Connectivity::Eight;
        } else if (k == "services.decoder_url") cfg.decoder_endpoint.base_url = v;
        else if (k == "services.segmentor_url") cfg.segmentor_endpoint.base_url = v;
        else if (k == "services.llm_url") cfg.llm_endpoint.base_url = v;
        else if (k == "services.retries") {
          const int r = std::stoi(v);
          cfg.decoder_endpoint.retries = cfg.segmentor_endpoint.retries = cfg.llm_endpoint.retries = r;
        } else if (k == "mock.enabled") cfg.mock = (v == "true" || v == "1" || v == "yes");
        else if (k == "mock.decoder_fixture") cfg.mock_decoder_fixture = path_of(v);
        else if (k == "mock.segmentor_dir") cfg.mock_segmentor_dir = path_of(v);
        else if (k == "mock.llm_fixture") cfg.mock_llm_fixture = path_of(v);
        else if (k == "run.resume") cfg.resume = (v == "true" || v == "1" || v == "yes");
        else throw ConfigError("config: unknown key '" + k + "'");
      }
    }
  } catch (const std::invalid_argument&) {
    throw ConfigError("config: malformed number in " + ini_path.string());
  } catch (const std::out_of_range&) {
    throw ConfigError("config: number out of range in " + ini_path.string());
  }
  return cfg;
}

}  // namespace selfseg
