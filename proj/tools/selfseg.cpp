// selfseg: command line front end for the pipeline.
//
// Exit codes: 0 success, 2 validation/config error, 3 transport error,
// 4 some images of a dataset run failed.

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "selfseg/fixture.hpp"
#include "selfseg/pipeline.hpp"
#include "selfseg/serialization.hpp"

namespace fs = std::filesystem;
using namespace selfseg;

namespace {

constexpr int kOk = 0;
constexpr int kValidation = 2;
constexpr int kTransport = 3;
constexpr int kPartial = 4;

struct CommonFlags {
  std::string config;
  bool mock = false;
  int jobs = 1;
  std::optional<std::uint64_t> seed;
  std::optional<int> cycles;
  std::string wordnet_dir;
  std::string dataset;
  std::string out_dir = "selfseg-out";
};

void add_common(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--config", f.config, "INI configuration file")->check(CLI::ExistingFile);
  cmd->add_flag("--mock", f.mock, "use the mock service clients from the config's [mock] section");
  cmd->add_option("--jobs", f.jobs, "worker threads")->check(CLI::PositiveNumber);
  cmd->add_option("--seed", f.seed, "seed for clustering and caption sampling");
  cmd->add_option("--cycles", f.cycles, "captioning cycles")->check(CLI::PositiveNumber);
  cmd->add_option("--wordnet-dir", f.wordnet_dir, "WordNet 3.0 dict directory");
  cmd->add_option("--dataset", f.dataset, "evaluation vocabulary")
      ->check(CLI::IsMember({"voc", "ade20k", "cityscapes", "custom"}));
  cmd->add_option("--out-dir", f.out_dir, "artifact directory");
}

PipelineConfig resolve_config(const CommonFlags& f) {
  PipelineConfig cfg = f.config.empty() ? default_config() : load_config(f.config);
  if (f.mock) cfg.mock = true;
  if (f.seed) cfg.clustering.seed = cfg.decode.seed = *f.seed;
  if (f.cycles) cfg.n_cycles = *f.cycles;
  if (!f.wordnet_dir.empty()) cfg.wordnet_dir = f.wordnet_dir;
  if (!f.dataset.empty()) cfg.dataset = f.dataset;
  cfg.validate();
  return cfg;
}

const ImageEntry& find_image(const Manifest& m, const std::string& id) {
  for (const auto& e : m.images)
    if (e.id == id) return e;
  throw NotFoundError("manifest has no image '" + id + "'");
}

void print_image(const ImageResult& r) {
  std::cout << r.id << ":";
  if (r.cluster_mask) {
    std::set<int> ids(r.cluster_mask->labels.begin(), r.cluster_mask->labels.end());
    std::cout << " clusters=" << ids.size();
  }
  if (!r.nouns.nouns.empty()) std::cout << " nouns=" << r.nouns.nouns.size();
  if (r.miou) std::cout << " mIoU=" << 100.0 * r.miou->miou;
  if (r.cmiou) std::cout << " cmIoU=" << 100.0 * r.cmiou->cmiou;
  if (r.cmiou_clusters) std::cout << " cmIoU(clusters)=" << 100.0 * r.cmiou_clusters->cmiou;
  std::cout << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Self-guided open-vocabulary segmentation pipeline"};
  app.require_subcommand(1);

  CommonFlags flags;
  std::string manifest_path;
  std::string image_id;

  struct StageVerb {
    const char* name;
    const char* help;
    Stage until;
  };
  const StageVerb stage_verbs[] = {
      {"cluster", "cluster, fuse and denoise one image's embeddings", Stage::Cluster},
      {"caption", "caption the denoised clusters of one image", Stage::Caption},
      {"nouns", "extract the noun set of one image", Stage::Nouns},
      {"guide", "segment one image guided by its nouns", Stage::Guide},
      {"run", "run every stage on one image", Stage::Evaluate},
  };
  std::map<CLI::App*, Stage> per_image;
  for (const auto& v : stage_verbs) {
    auto* cmd = app.add_subcommand(v.name, v.help);
    add_common(cmd, flags);
    cmd->add_option("--manifest", manifest_path, "dataset manifest")->required()->check(CLI::ExistingFile);
    cmd->add_option("--image", image_id, "image id from the manifest")->required();
    per_image[cmd] = v.until;
  }

  std::string gt_path;
  std::string pred_path;
  auto* evaluate = app.add_subcommand("evaluate", "LOVE remapping plus mIoU/cmIoU for one image");
  add_common(evaluate, flags);
  auto* m_opt = evaluate->add_option("--manifest", manifest_path, "dataset manifest")->check(CLI::ExistingFile);
  auto* i_opt = evaluate->add_option("--image", image_id, "image id from the manifest");
  auto* g_opt = evaluate->add_option("--gt", gt_path, "ground-truth PGM")->check(CLI::ExistingFile);
  auto* p_opt = evaluate->add_option("--pred", pred_path, "predicted PGM")->check(CLI::ExistingFile);
  m_opt->needs(i_opt);
  g_opt->needs(p_opt);
  p_opt->needs(g_opt);
  m_opt->excludes(g_opt);

  auto* dataset = app.add_subcommand("run-dataset", "run every image of a manifest and aggregate");
  add_common(dataset, flags);
  dataset->add_option("--manifest", manifest_path, "dataset manifest")->required()->check(CLI::ExistingFile);

  FixtureDatasetParams fixture;
  std::string fixture_dir;
  auto* make_fixture = app.add_subcommand("make-fixture", "write a synthetic mock-mode dataset");
  make_fixture->add_option("dir", fixture_dir, "output directory")->required();
  make_fixture->add_option("--images", fixture.n_images, "number of images");
  make_fixture->add_option("--size", fixture.image_size, "image side in pixels");
  make_fixture->add_option("--seed", fixture.seed, "scene seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kValidation;
  }

  try {
    if (make_fixture->parsed()) {
      std::cout << write_fixture_dataset(fixture_dir, fixture).string() << "\n";
      return kOk;
    }

    const PipelineConfig cfg = resolve_config(flags);
    const Pipeline pipeline(cfg, make_clients(cfg));
    const fs::path out_dir = flags.out_dir;

    for (const auto& [cmd, until] : per_image) {
      if (!cmd->parsed()) continue;
      const Manifest manifest = Manifest::load(manifest_path);
      print_image(pipeline.run_image(find_image(manifest, image_id), out_dir, flags.jobs, until));
      return kOk;
    }

    if (evaluate->parsed()) {
      if (!manifest_path.empty()) {
        const Manifest manifest = Manifest::load(manifest_path);
        const ImageEntry& entry = find_image(manifest, image_id);
        if (!entry.gt) throw ValidationError("image '" + image_id + "' has no ground truth");
        print_image(pipeline.run_image(entry, out_dir, flags.jobs, Stage::Evaluate));
        return kOk;
      }
      if (gt_path.empty()) throw ValidationError("evaluate needs --manifest/--image or --gt/--pred");
      const auto ev = pipeline.evaluate(read_label_mask(gt_path), read_label_mask(pred_path));
      fs::create_directories(out_dir);
      const std::string hash = cfg.hash();
      write_artifact(out_dir / "mapping.json", hash, to_json(ev.mapping));
      write_label_mask(out_dir / "remapped.pgm", ev.remapped, hash);
      nlohmann::ordered_json report;
      report["miou"] = nlohmann::ordered_json::parse(to_json(ev.miou));
      report["cmiou"] = nlohmann::ordered_json::parse(to_json(ev.cmiou));
      write_artifact(out_dir / "report.json", hash, report.dump());
      std::cout << "mIoU=" << 100.0 * ev.miou.miou << " cmIoU=" << 100.0 * ev.cmiou.cmiou << "\n";
      return kOk;
    }

    if (dataset->parsed()) {
      const Manifest manifest = Manifest::load(manifest_path);
      const DatasetReport report = pipeline.run_dataset(manifest, out_dir, flags.jobs);
      std::ifstream summary(out_dir / "summary.txt");
      std::cout << summary.rdbuf();
      for (const auto& f : report.failures)
        std::cerr << "failed: " << f.id << " [" << f.stage << "] " << f.message << "\n";
      if (report.failures.empty()) return kOk;
      const bool all_transport = std::all_of(report.failures.begin(), report.failures.end(),
                                             [](const ImageFailure& f) { return f.transport; });
      return report.n_images > 0 && static_cast<int>(report.failures.size()) == report.n_images && all_transport
                 ? kTransport
                 : kPartial;
    }
  } catch (const StageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.is_transport() ? kTransport : kValidation;
  } catch (const TransportError& e) {
    std::cerr << "transport error: " << e.what() << "\n";
    return kTransport;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kValidation;
  }
  return kOk;
}
