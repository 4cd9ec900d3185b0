#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "selfseg/caption_engine.hpp"
#include "selfseg/clients.hpp"
#include "selfseg/clustering.hpp"
#include "selfseg/denoise.hpp"
#include "selfseg/eval_metrics.hpp"

namespace selfseg {

enum class PipelineMode { SelfSeg, PlainCaption };

/// Every tunable of a run. Loaded from an INI file with one section per
/// stage; each key mirrors a CLI flag and the flag wins.
struct PipelineConfig {
  ClusterConfig clustering;
  int positional_dim = 256;

  CrfParams crf;
  int majority_max_iters = 8;

  DecodeParams decode;
  int n_cycles = 1;
  int caption_in_flight = 1;

  std::filesystem::path wordnet_dir;

  PipelineMode mode = PipelineMode::SelfSeg;
  int image_height = 512;  // used when no ground truth fixes the size
  int image_width = 512;

  std::string dataset = "voc";
  std::filesystem::path vocab_path;  // empty: <data>/vocab/<dataset>.txt
  std::filesystem::path prompts_dir;
  int llm_batch_size = 8;
  Connectivity connectivity = Connectivity::Four;

  HttpEndpoint decoder_endpoint{"http://127.0.0.1:8601"};
  HttpEndpoint segmentor_endpoint{"http://127.0.0.1:8602"};
  HttpEndpoint llm_endpoint{"http://127.0.0.1:8603"};

  bool mock = false;
  std::filesystem::path mock_decoder_fixture;
  std::filesystem::path mock_segmentor_dir;
  std::filesystem::path mock_llm_fixture;

  bool resume = true;  // reuse stage artifacts written under the same config hash

  /// Throws ConfigError on the first inconsistent value.
  void validate() const;

  /// Canonical `section.key=value` listing of every field that influences
  /// results (run-time knobs such as job counts are excluded).
  std::string canonical() const;
  /// Hex FNV-1a of canonical().
  std::string hash() const;
};

/// Directory holding wordnet-3.0/, prompts/ and vocab/. Resolution order:
/// SELFSEG_DATA_DIR environment variable, then the build-time default.
std::filesystem::path default_data_dir();

/// Defaults with data paths filled in from default_data_dir().
PipelineConfig default_config();

/// Overlays an INI file on `base`. Relative paths are resolved against the
/// file's directory.
PipelineConfig load_config(const std::filesystem::path& ini_path, PipelineConfig base = default_config());

std::filesystem::path vocab_file(const PipelineConfig& cfg);

/// One class name per line; blank lines and '#' comments skipped.
std::vector<std::string> load_vocabulary(const std::filesystem::path& path);

}  // namespace selfseg
