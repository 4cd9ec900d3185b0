#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "selfseg/clients.hpp"
#include "selfseg/config.hpp"
#include "selfseg/consensus.hpp"
#include "selfseg/eval_metrics.hpp"
#include "selfseg/guidance.hpp"
#include "selfseg/love_evaluator.hpp"
#include "selfseg/noun_filter.hpp"

namespace selfseg {

struct ImageEntry {
  std::string id;
  std::map<std::string, std::filesystem::path> embeddings;  // resolution tag -> .peg
  std::filesystem::path image;
  std::optional<std::filesystem::path> gt;  // PGM with .vocab.json sidecar
};

/// Dataset manifest:
///   {"images": [{"id": "...", "embeddings": {"default_384": "a.peg", ...},
///                "image": "a.png", "gt": "a_gt.pgm"}]}
/// Relative paths are resolved against the manifest's directory.
struct Manifest {
  std::vector<ImageEntry> images;

  static Manifest load(const std::filesystem::path& path);
  static Manifest parse(std::string_view json, const std::filesystem::path& base_dir);
};

struct ServiceClients {
  std::shared_ptr<DecoderClient> decoder;
  std::shared_ptr<SegmentorClient> segmentor;
  std::shared_ptr<LlmClient> llm;
};

/// Mock clients from the fixture paths when cfg.mock, HTTP clients otherwise.
ServiceClients make_clients(const PipelineConfig& cfg);

/// Output of the algorithmic stages (cluster -> consensus -> denoise).
struct ClusterStage {
  std::vector<ClusterAssignment> runs;        // as clustered, per resolution
  std::vector<AlignmentMap> alignments;       // against the reference run
  ClusterProbabilityField consensus;
  DenoisedGrid denoised;
  PatchEmbeddingGrid caption_grid;            // augmented grid on the common support
};

/// Positional augmentation, k-means over every (resolution, k), resampling
/// to the finest grid, consensus and denoising.
ClusterStage run_cluster_stage(const std::map<std::string, PatchEmbeddingGrid>& grids, const PipelineConfig& cfg,
                               int jobs = 1);

/// Augmented embeddings of the finest configured grid; the grid captions are
/// drawn from.
PatchEmbeddingGrid caption_grid(const std::map<std::string, PatchEmbeddingGrid>& grids, const PipelineConfig& cfg);

/// Stages of run_image, in execution order.
enum class Stage { Cluster, Caption, Nouns, Guide, Evaluate };

struct ImageResult {
  std::string id;
  std::optional<ClusterMask> cluster_mask;  // absent in plain-blip mode
  NounSet nouns;
  LabelMask prediction;
  std::optional<LabelMask> remapped;
  std::optional<MappingDict> mapping;
  std::optional<IouReport> miou;
  std::optional<CmIouReport> cmiou;           // final prediction
  std::optional<CmIouReport> cmiou_clusters;  // cluster mask alone
};

struct ImageFailure {
  std::string id;
  std::string stage;
  std::string message;
  bool transport = false;
};

struct DatasetReport {
  int n_images = 0;
  int n_evaluated = 0;
  std::vector<ImageFailure> failures;
  IouReport miou;
  double cmiou = 0.0;
  double cmiou_clusters = 0.0;
  int n_gt_segments = 0;
};

/// Stage wiring with artifact persistence. Every artifact is written under
/// `<out_dir>/<image id>/` and carries the config hash; with cfg.resume an
/// artifact written under the same hash is loaded instead of recomputed.
class Pipeline {
 public:
  Pipeline(PipelineConfig cfg, ServiceClients clients);

  const PipelineConfig& config() const noexcept { return cfg_; }
  const NounDictionary& dictionary() const noexcept { return dict_; }
  const std::vector<std::string>& dataset_vocabulary() const noexcept { return dataset_vocab_; }
  /// "background" followed by the dataset classes.
  std::vector<std::string> target_vocabulary() const;

  /// Runs the stages up to and including `until`. Throws StageError tagged
  /// with the failing stage; artifacts of completed stages stay on disk.
  ImageResult run_image(const ImageEntry& entry, const std::filesystem::path& out_dir, int jobs = 1,
                        Stage until = Stage::Evaluate) const;

  /// Images run concurrently up to `jobs`. Failed images are reported and
  /// excluded from the aggregate. Writes aggregate.json, per_image.csv and
  /// summary.txt into out_dir.
  DatasetReport run_dataset(const Manifest& manifest, const std::filesystem::path& out_dir, int jobs = 1) const;

  /// Remaps `pred` with LOVE and scores it against `gt`.
  struct Evaluation {
    MappingDict mapping;
    LabelMask remapped;
    IouReport miou;
    CmIouReport cmiou;
  };
  Evaluation evaluate(const LabelMask& gt, const LabelMask& pred) const;

 private:
  PipelineConfig cfg_;
  ServiceClients clients_;
  NounDictionary dict_;
  PromptTemplate prompt_;
  std::vector<std::string> dataset_vocab_;
  std::string hash_;
};

/// Writes `{"config_hash": ..., <payload fields>}`.
void write_artifact(const std::filesystem::path& path, std::string_view config_hash, const std::string& payload_json);
/// Payload of an artifact written under `config_hash`, or nullopt when the
/// file is missing or was produced by another configuration.
std::optional<std::string> read_artifact(const std::filesystem::path& path, std::string_view config_hash);

}  // namespace selfseg
