#include "selfseg/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <fstream>
#include <future>
#include <sstream>

#include "json.hpp"
#include "selfseg/serialization.hpp"

namespace selfseg {
namespace fs = std::filesystem;

namespace {

using ojson = nlohmann::ordered_json;

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw NotFoundError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void spit(const fs::path& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ValidationError("cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// Runs `fn`, re-throwing library errors as StageError tagged with `stage`.
template <typename Fn>
auto stage(const char* name, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const StageError&) {
    throw;
  } catch (const TransportError& e) {
    throw StageError(name, e.what(), true);
  } catch (const Error& e) {
    throw StageError(name, e.what(), false);
  } catch (const std::exception& e) {
    throw StageError(name, e.what(), false);
  }
}

const PatchEmbeddingGrid& finest(const std::map<std::string, PatchEmbeddingGrid>& grids, const PipelineConfig& cfg) {
  const PatchEmbeddingGrid* best = nullptr;
  for (const auto& tag : cfg.clustering.resolutions) {
    auto it = grids.find(tag);
    if (it == grids.end()) throw ConfigError("no embedding grid for resolution '" + tag + "'");
    if (!best || it->second.patch_count() > best->patch_count()) best = &it->second;
  }
  return *best;
}

std::optional<LabelMask> read_mask_artifact(const fs::path& pgm, std::string_view hash) {
  if (!fs::exists(pgm) || !fs::exists(vocab_sidecar_path(pgm))) return std::nullopt;
  try {
    const auto sidecar = nlohmann::json::parse(slurp(vocab_sidecar_path(pgm)));
    if (sidecar.value("config_hash", std::string()) != hash) return std::nullopt;
    return read_label_mask(pgm);
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

}  // namespace

void write_artifact(const fs::path& path, std::string_view config_hash, const std::string& payload_json) {
  ojson out;
  out["config_hash"] = config_hash;
  const ojson payload = ojson::parse(payload_json);
  if (!payload.is_object()) throw ValidationError("artifact payload must be a JSON object");
  for (const auto& [k, v] : payload.items()) out[k] = v;
  spit(path, out.dump() + "\n");
}

std::optional<std::string> read_artifact(const fs::path& path, std::string_view config_hash) {
  if (!fs::exists(path)) return std::nullopt;
  try {
    auto j = ojson::parse(slurp(path));
    if (j.value("config_hash", std::string()) != config_hash) return std::nullopt;
    j.erase("config_hash");
    return j.dump();
  } catch (const nlohmann::json::exception&) {
    return std::nullopt;
  }
}

Manifest Manifest::parse(std::string_view json, const fs::path& base_dir) {
  auto resolve = [&](const std::string& p) {
    fs::path path(p);
    return path.is_absolute() ? path : base_dir / path;
  };
  try {
    const auto j = nlohmann::json::parse(json);
    Manifest m;
    for (const auto& img : j.at("images")) {
      ImageEntry e;
      e.id = img.at("id").get<std::string>();
      if (e.id.empty() || e.id.find_first_of("/\\") != std::string::npos || e.id == "." || e.id == "..")
        throw ValidationError("manifest: image id '" + e.id + "' is not a valid directory name");
      for (const auto& [tag, p] : img.at("embeddings").items()) e.embeddings[tag] = resolve(p.get<std::string>());
      e.image = resolve(img.value("image", e.id));
      if (img.contains("gt") && !img.at("gt").is_null()) e.gt = resolve(img.at("gt").get<std::string>());
      m.images.push_back(std::move(e));
    }
    std::vector<std::string> ids;
    for (const auto& e : m.images) ids.push_back(e.id);
    std::sort(ids.begin(), ids.end());
    if (std::adjacent_find(ids.begin(), ids.end()) != ids.end()) throw ValidationError("manifest: duplicate image id");
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("manifest: ") + e.what());
  }
}

Manifest Manifest::load(const fs::path& path) { return parse(slurp(path), path.parent_path()); }

ServiceClients make_clients(const PipelineConfig& cfg) {
  ServiceClients c;
  if (cfg.mock) {
    c.decoder = std::make_shared<MockDecoderClient>(MockDecoderClient::from_file(cfg.mock_decoder_fixture));
    c.segmentor = std::make_shared<MockSegmentorClient>(cfg.mock_segmentor_dir);
    c.llm = std::make_shared<MockLlmClient>(MockLlmClient::from_file(cfg.mock_llm_fixture));
  } else {
    c.decoder = std::make_shared<HttpDecoderClient>(cfg.decoder_endpoint);
    c.segmentor = std::make_shared<HttpSegmentorClient>(cfg.segmentor_endpoint);
    c.llm = std::make_shared<HttpLlmClient>(cfg.llm_endpoint);
  }
  return c;
}

PatchEmbeddingGrid caption_grid(const std::map<std::string, PatchEmbeddingGrid>& grids, const PipelineConfig& cfg) {
  return augment_with_positions(finest(grids, cfg), PositionalEncoding(cfg.positional_dim));
}

ClusterStage run_cluster_stage(const std::map<std::string, PatchEmbeddingGrid>& grids, const PipelineConfig& cfg,
                               int jobs) {
  const PositionalEncoding enc(cfg.positional_dim);
  std::map<std::string, PatchEmbeddingGrid> augmented;
  for (const auto& tag : cfg.clustering.resolutions) {
    auto it = grids.find(tag);
    if (it == grids.end()) throw ConfigError("no embedding grid for resolution '" + tag + "'");
    augmented.emplace(tag, augment_with_positions(it->second, enc));
  }
  ClusterStage out;
  out.runs = run_all(augmented, cfg.clustering, jobs);
  const PatchEmbeddingGrid& target = finest(augmented, cfg);
  std::vector<ClusterAssignment> common;
  for (const auto& run : out.runs) common.push_back(resample_assignment(run, target.height, target.width));
  out.consensus = build_consensus(common, &out.alignments);
  out.denoised = denoise(out.consensus, cfg.crf, cfg.majority_max_iters);
  out.caption_grid = target;
  return out;
}

Pipeline::Pipeline(PipelineConfig cfg, ServiceClients clients) : cfg_(std::move(cfg)), clients_(std::move(clients)) {
  cfg_.validate();
  if (!clients_.decoder || !clients_.segmentor || !clients_.llm) throw ConfigError("pipeline: missing service client");
  dict_ = NounDictionary::load(cfg_.wordnet_dir);
  prompt_ = PromptTemplate::for_dataset(cfg_.prompts_dir, cfg_.dataset);
  dataset_vocab_ = load_vocabulary(vocab_file(cfg_));
  hash_ = cfg_.hash();
}

std::vector<std::string> Pipeline::target_vocabulary() const {
  std::vector<std::string> v{kBackground};
  for (const auto& c : dataset_vocab_)
    if (c != kBackground) v.push_back(c);
  return v;
}

Pipeline::Evaluation Pipeline::evaluate(const LabelMask& gt, const LabelMask& pred) const {
  std::vector<std::string> predicted;
  for (const auto& [idx, name] : pred.vocabulary)
    if (name != kBackground) predicted.push_back(name);
  Evaluation ev;
  ev.mapping = build_mapping(predicted, dataset_vocab_, prompt_, LoveOptions{cfg_.llm_batch_size, 1}, *clients_.llm);
  ev.remapped = remap_mask(pred, ev.mapping, target_vocabulary());
  ev.miou = miou(gt, ev.remapped, target_vocabulary());
  ev.cmiou = cmiou(gt, pred, cfg_.connectivity);
  return ev;
}

ImageResult Pipeline::run_image(const ImageEntry& entry, const fs::path& out_dir, int jobs, Stage until) const {
  const fs::path dir = out_dir / entry.id;
  stage("io", [&] {
    fs::create_directories(dir);
    return 0;
  });
  const bool resume = cfg_.resume;
  auto cached = [&](const char* file) -> std::optional<std::string> {
    return resume ? read_artifact(dir / file, hash_) : std::nullopt;
  };

  ImageResult result;
  result.id = entry.id;

  auto finish = [&]() -> ImageResult {
    stage("io", [&] {
      ojson prov;
      prov["image_id"] = entry.id;
      prov["config"] = cfg_.canonical();
      ojson files = ojson::array();
      for (const char* f : {"assignments.json", "consensus.json", "denoised.json", "cluster_mask.pgm", "captions.json",
                            "nouns.json", "prediction.pgm", "mapping.json", "remapped.pgm", "report.json"})
        if (fs::exists(dir / f)) files.push_back(f);
      prov["artifacts"] = files;
      write_artifact(dir / "provenance.json", hash_, prov.dump());
      return 0;
    });
    return result;
  };

  std::optional<LabelMask> gt;
  if (entry.gt) gt = stage("load", [&] { return read_label_mask(*entry.gt); });
  const int image_h = gt ? gt->height : cfg_.image_height;
  const int image_w = gt ? gt->width : cfg_.image_width;

  auto grids = stage("load", [&] {
    std::map<std::string, PatchEmbeddingGrid> g;
    for (const auto& tag : cfg_.clustering.resolutions) {
      auto it = entry.embeddings.find(tag);
      if (it == entry.embeddings.end()) throw NotFoundError("no embeddings for resolution '" + tag + "'");
      PatchEmbeddingGrid grid = read_peg(it->second);
      if (grid.resolution_tag != tag)
        throw ValidationError(it->second.string() + " is tagged '" + grid.resolution_tag + "', expected '" + tag + "'");
      g.emplace(tag, std::move(grid));
    }
    return g;
  });

  CaptionBatch captions;
  if (cfg_.mode == PipelineMode::SelfSeg) {
    DenoisedGrid denoised = stage("cluster", [&] {
      if (auto payload = cached("denoised.json")) return denoised_from_json(*payload);
      ClusterStage cs = run_cluster_stage(grids, cfg_, jobs);
      write_artifact(dir / "assignments.json", hash_, to_json(cs.runs));
      write_artifact(dir / "consensus.json", hash_, to_json(cs.consensus));
      write_artifact(dir / "denoised.json", hash_, to_json(cs.denoised));
      return cs.denoised;
    });
    result.cluster_mask = stage("cluster", [&] {
      ClusterMask cm = clusters_to_mask(denoised, image_h, image_w);
      write_label_mask(dir / "cluster_mask.pgm", cluster_mask_to_label_mask(cm), hash_);
      return cm;
    });
    if (until == Stage::Cluster) return finish();
    captions = stage("caption", [&] {
      if (auto payload = cached("captions.json")) return captions_from_json(*payload);
      const PatchEmbeddingGrid grid = caption_grid(grids, cfg_);
      CaptionBatch batch;
      try {
        batch = run_cycles(grid, denoised, cfg_.decode, CaptionOptions{cfg_.n_cycles, cfg_.caption_in_flight},
                           *clients_.decoder);
      } catch (const CaptionTransportError& e) {
        write_artifact(dir / "captions.partial.json", hash_, to_json(e.partial()));
        throw;
      }
      write_artifact(dir / "captions.json", hash_, to_json(batch));
      return batch;
    });
  } else {
    if (until == Stage::Cluster) return finish();
    captions = stage("caption", [&] {
      if (auto payload = cached("captions.json")) return captions_from_json(*payload);
      const PatchEmbeddingGrid& grid = grids.at(cfg_.clustering.resolutions.front());
      CaptionBatch batch = run_whole_image(grid, cfg_.decode, CaptionOptions{cfg_.n_cycles, cfg_.caption_in_flight},
                                           *clients_.decoder);
      write_artifact(dir / "captions.json", hash_, to_json(batch));
      return batch;
    });
  }

  if (until == Stage::Cluster || until == Stage::Caption) return finish();

  result.nouns = stage("nouns", [&] {
    if (auto payload = cached("nouns.json")) return nouns_from_json(*payload);
    DictionaryTagger tagger(dict_);
    NounSet nouns = extract_nouns(captions.records, dict_, tagger);
    write_artifact(dir / "nouns.json", hash_, to_json(nouns));
    return nouns;
  });

  if (until == Stage::Nouns) return finish();

  result.prediction = stage("guide", [&] {
    if (resume)
      if (auto m = read_mask_artifact(dir / "prediction.pgm", hash_)) return *m;
    LabelMask pred = segment_with_guidance(entry.image.string(), result.nouns, *clients_.segmentor);
    if (pred.height != image_h || pred.width != image_w)
      throw ValidationError("segmentor mask is " + std::to_string(pred.height) + "x" + std::to_string(pred.width) +
                            ", expected " + std::to_string(image_h) + "x" + std::to_string(image_w));
    write_label_mask(dir / "prediction.pgm", pred, hash_);
    return pred;
  });

  if (gt && until == Stage::Evaluate) {
    stage("evaluate", [&] {
      Evaluation ev = evaluate(*gt, result.prediction);
      write_artifact(dir / "mapping.json", hash_, to_json(ev.mapping));
      write_label_mask(dir / "remapped.pgm", ev.remapped, hash_);
      result.mapping = std::move(ev.mapping);
      result.remapped = std::move(ev.remapped);
      result.miou = std::move(ev.miou);
      result.cmiou = std::move(ev.cmiou);
      if (result.cluster_mask)
        result.cmiou_clusters = cmiou(*gt, cluster_mask_to_label_mask(*result.cluster_mask), cfg_.connectivity);

      ojson report;
      report["image_id"] = entry.id;
      report["miou"] = ojson::parse(to_json(*result.miou));
      report["cmiou"] = ojson::parse(to_json(*result.cmiou));
      if (result.cmiou_clusters) report["cmiou_clusters"] = ojson::parse(to_json(*result.cmiou_clusters));
      report["n_nouns"] = result.nouns.nouns.size();
      write_artifact(dir / "report.json", hash_, report.dump());
      return 0;
    });
  }

  return finish();
}

DatasetReport Pipeline::run_dataset(const Manifest& manifest, const fs::path& out_dir, int jobs) const {
  fs::create_directories(out_dir);
  const std::size_t n = manifest.images.size();
  std::vector<std::optional<ImageResult>> results(n);
  std::vector<std::optional<ImageFailure>> failures(n);

  auto process = [&](std::size_t i) {
    const auto& entry = manifest.images[i];
    try {
      results[i] = run_image(entry, out_dir);
    } catch (const StageError& e) {
      failures[i] = ImageFailure{entry.id, e.stage(), e.what(), e.is_transport()};
    } catch (const std::exception& e) {
      failures[i] = ImageFailure{entry.id, "unknown", e.what(), false};
    }
  };
  if (jobs <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) process(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::future<void>> pool;
    const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(jobs), n);
    for (std::size_t t = 0; t < workers; ++t)
      pool.push_back(std::async(std::launch::async, [&] {
        for (std::size_t i = next++; i < n; i = next++) process(i);
      }));
    for (auto& f : pool) f.get();
  }

  DatasetReport report;
  report.n_images = static_cast<int>(n);
  DatasetAccumulator final_acc;
  DatasetAccumulator cluster_acc;
  std::string csv = "image_id,kind,key,iou\n";
  for (std::size_t i = 0; i < n; ++i) {
    if (failures[i]) {
      report.failures.push_back(*failures[i]);
      continue;
    }
    const auto& r = *results[i];
    if (!r.miou) continue;
    ++report.n_evaluated;
    final_acc.add(*r.miou);
    final_acc.add(*r.cmiou);
    csv += to_csv_rows(r.id, *r.miou);
    csv += to_csv_rows(r.id, *r.cmiou);
    if (r.cmiou_clusters) {
      cluster_acc.add(*r.cmiou_clusters);
      std::string rows = to_csv_rows(r.id, *r.cmiou_clusters);
      std::string patched;
      std::istringstream lines(rows);
      for (std::string line; std::getline(lines, line);) {
        const auto pos = line.find(",segment,");
        patched += line.substr(0, pos) + ",cluster_segment," + line.substr(pos + 9) + "\n";
      }
      csv += patched;
    }
  }
  report.miou = final_acc.miou();
  report.cmiou = final_acc.cmiou();
  report.cmiou_clusters = cluster_acc.cmiou();
  report.n_gt_segments = final_acc.n_gt_segments();

  ojson agg;
  agg["n_images"] = report.n_images;
  agg["n_evaluated"] = report.n_evaluated;
  agg["n_failed"] = report.failures.size();
  ojson fails = ojson::array();
  for (const auto& f : report.failures)
    fails.push_back({{"image_id", f.id}, {"stage", f.stage}, {"message", f.message}, {"transport", f.transport}});
  agg["failures"] = fails;
  agg["miou"] = ojson::parse(to_json(report.miou));
  agg["cmiou"] = report.cmiou;
  agg["cmiou_clusters"] = report.cmiou_clusters;
  agg["n_gt_segments"] = report.n_gt_segments;
  write_artifact(out_dir / "aggregate.json", hash_, agg.dump());
  spit(out_dir / "per_image.csv", "# config_hash " + hash_ + "\n" + csv);

  std::ostringstream summary;
  summary << "config_hash   " << hash_ << "\n"
          << "dataset       " << cfg_.dataset << "\n"
          << "images        " << report.n_images << " (" << report.n_evaluated << " evaluated, "
          << report.failures.size() << " failed)\n"
          << "mIoU (LOVE)   " << fmt(100.0 * report.miou.miou) << "\n"
          << "cmIoU         " << fmt(100.0 * report.cmiou) << "\n"
          << "cmIoU (BCC)   " << fmt(100.0 * report.cmiou_clusters) << "\n";
  spit(out_dir / "summary.txt", summary.str());
  return report;
}

}  // namespace selfseg
