#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "selfseg/denoise.hpp"
#include "selfseg/embedding_grid.hpp"
#include "selfseg/errors.hpp"

namespace selfseg {

struct DecodeParams {
  int min_len = 4;
  int max_len = 25;
  double top_p = 1.0;
  double repetition_penalty = 100.0;
  std::uint64_t seed = 0;

  void validate() const;
  bool operator==(const DecodeParams&) const = default;
};

using EmbeddingSubset = std::vector<std::vector<float>>;

/// Text decoder over an unordered set of patch embeddings.
class DecoderClient {
 public:
  virtual ~DecoderClient() = default;
  /// Returns the caption for one subset. `params.seed` is the per-call seed.
  /// Throws TransportError when the service cannot be reached at all, and
  /// DecodeError for a failed call that should not abort the batch.
  virtual std::string caption(const EmbeddingSubset& embeddings, const DecodeParams& params) = 0;
};

/// A single decode failed (service answered, but not with a caption).
class DecodeError : public Error {
 public:
  using Error::Error;
};

struct CaptionRecord {
  int cluster_id = 0;
  int cycle = 0;
  std::string text;
  std::uint64_t seed = 0;

  bool operator==(const CaptionRecord&) const = default;
};

struct CaptionFailure {
  int cluster_id = 0;
  int cycle = 0;
  std::uint64_t seed = 0;
  std::string message;

  bool operator==(const CaptionFailure&) const = default;
};

/// Successful records plus the (cluster, cycle) pairs whose decode failed,
/// both ordered by (cluster_id, cycle).
struct CaptionBatch {
  std::vector<CaptionRecord> records;
  std::vector<CaptionFailure> failures;
};

/// Raised when the decoder becomes unreachable; carries what was collected.
class CaptionTransportError : public TransportError {
 public:
  CaptionTransportError(const std::string& what, CaptionBatch partial)
      : TransportError(what), partial_(std::move(partial)) {}
  const CaptionBatch& partial() const noexcept { return partial_; }

 private:
  CaptionBatch partial_;
};

/// Embeddings of every patch labelled `cluster_id`, in row-major order.
EmbeddingSubset cluster_subset(const PatchEmbeddingGrid& grid, const DenoisedGrid& denoised, int cluster_id);

/// Deterministic per-call seed for (base seed, cluster, cycle).
std::uint64_t caption_seed(std::uint64_t base_seed, int cluster_id, int cycle);

struct CaptionOptions {
  int n_cycles = 1;
  int max_in_flight = 1;
};

/// One decoder call per (cluster, cycle) pair for every cluster present in
/// `denoised`.
CaptionBatch run_cycles(const PatchEmbeddingGrid& grid, const DenoisedGrid& denoised, const DecodeParams& params,
                        const CaptionOptions& options, DecoderClient& decoder);

/// Captions the whole grid as one subset (cluster id 0), for the plain
/// encoder/decoder baseline without clustering.
CaptionBatch run_whole_image(const PatchEmbeddingGrid& grid, const DecodeParams& params,
                             const CaptionOptions& options, DecoderClient& decoder);

}  // namespace selfseg
