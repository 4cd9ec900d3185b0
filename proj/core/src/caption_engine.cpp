#include "selfseg/caption_engine.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <future>
#include <mutex>

#include "selfseg/rng.hpp"

namespace selfseg {

void DecodeParams::validate() const {
  if (min_len <= 0 || min_len > max_len) throw ValidationError("decode params: need 0 < min_len <= max_len");
  if (!(top_p > 0.0 && top_p <= 1.0)) throw ValidationError("decode params: top_p must be in (0, 1]");
  if (!(repetition_penalty > 0.0) || !std::isfinite(repetition_penalty))
    throw ValidationError("decode params: repetition_penalty must be positive");
}

EmbeddingSubset cluster_subset(const PatchEmbeddingGrid& grid, const DenoisedGrid& denoised, int cluster_id) {
  if (grid.height != denoised.height || grid.width != denoised.width)
    throw ValidationError("cluster_subset: embedding grid " + std::to_string(grid.height) + "x" +
                          std::to_string(grid.width) + " does not match denoised grid " +
                          std::to_string(denoised.height) + "x" + std::to_string(denoised.width));
  EmbeddingSubset out;
  for (int i = 0; i < grid.patch_count(); ++i) {
    if (denoised.labels[static_cast<std::size_t>(i)] != cluster_id) continue;
    auto p = grid.patch(i);
    out.emplace_back(p.begin(), p.end());
  }
  if (out.empty()) throw NotFoundError("cluster_subset: cluster " + std::to_string(cluster_id) + " has no patches");
  return out;
}

std::uint64_t caption_seed(std::uint64_t base_seed, int cluster_id, int cycle) {
  return combine_keys(combine_keys(base_seed, static_cast<std::uint64_t>(cluster_id)),
                      static_cast<std::uint64_t>(cycle));
}

namespace {

struct CaptionJob {
  int cluster_id;
  int cycle;
  const EmbeddingSubset* subset;
};

CaptionBatch dispatch(const std::vector<CaptionJob>& jobs, const DecodeParams& params, int max_in_flight,
                      DecoderClient& decoder) {
  struct Outcome {
    bool done = false;
    bool ok = false;
    std::string text;
  };
  std::vector<Outcome> outcomes(jobs.size());
  std::atomic<bool> unreachable{false};
  std::string transport_message;
  std::mutex mu;

  auto run_job = [&](std::size_t i) {
    if (unreachable.load()) return;
    DecodeParams call = params;
    call.seed = caption_seed(params.seed, jobs[i].cluster_id, jobs[i].cycle);
    try {
      std::string text = decoder.caption(*jobs[i].subset, call);
      if (text.empty()) throw DecodeError("decoder returned an empty caption");
      outcomes[i] = {true, true, std::move(text)};
    } catch (const TransportError& e) {
      std::lock_guard lock(mu);
      if (!unreachable.exchange(true)) transport_message = e.what();
    } catch (const DecodeError& e) {
      outcomes[i] = {true, false, e.what()};
    }
  };

  const std::size_t workers = std::clamp<std::size_t>(static_cast<std::size_t>(std::max(1, max_in_flight)), 1, std::max<std::size_t>(1, jobs.size()));
  if (workers == 1) {
    for (std::size_t i = 0; i < jobs.size(); ++i) run_job(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::future<void>> pool;
    for (std::size_t t = 0; t < workers; ++t)
      pool.push_back(std::async(std::launch::async, [&] {
        for (std::size_t i = next++; i < jobs.size(); i = next++) run_job(i);
      }));
    for (auto& f : pool) f.get();
  }

  CaptionBatch batch;
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    const auto& o = outcomes[i];
    if (!o.done) continue;
    const std::uint64_t seed = caption_seed(params.seed, jobs[i].cluster_id, jobs[i].cycle);
    if (o.ok)
      batch.records.push_back({jobs[i].cluster_id, jobs[i].cycle, o.text, seed});
    else
      batch.failures.push_back({jobs[i].cluster_id, jobs[i].cycle, seed, o.text});
  }
  if (unreachable) throw CaptionTransportError("decoder unreachable: " + transport_message, std::move(batch));
  return batch;
}

}  // namespace

CaptionBatch run_cycles(const PatchEmbeddingGrid& grid, const DenoisedGrid& denoised, const DecodeParams& params,
                        const CaptionOptions& options, DecoderClient& decoder) {
  params.validate();
  if (options.n_cycles < 1) throw ValidationError("run_cycles: n_cycles must be >= 1");
  const std::vector<int> clusters = denoised.label_set();
  std::vector<EmbeddingSubset> subsets;
  subsets.reserve(clusters.size());
  for (int id : clusters) subsets.push_back(cluster_subset(grid, denoised, id));

  std::vector<CaptionJob> jobs;
  for (std::size_t i = 0; i < clusters.size(); ++i)
    for (int cycle = 0; cycle < options.n_cycles; ++cycle) jobs.push_back({clusters[i], cycle, &subsets[i]});
  return dispatch(jobs, params, options.max_in_flight, decoder);
}

CaptionBatch run_whole_image(const PatchEmbeddingGrid& grid, const DecodeParams& params,
                             const CaptionOptions& options, DecoderClient& decoder) {
  params.validate();
  grid.validate();
  if (options.n_cycles < 1) throw ValidationError("run_whole_image: n_cycles must be >= 1");
  EmbeddingSubset all;
  for (int i = 0; i < grid.patch_count(); ++i) {
    auto p = grid.patch(i);
    all.emplace_back(p.begin(), p.end());
  }
  std::vector<CaptionJob> jobs;
  for (int cycle = 0; cycle < options.n_cycles; ++cycle) jobs.push_back({0, cycle, &all});
  return dispatch(jobs, params, options.max_in_flight, decoder);
}

}  // namespace selfseg
