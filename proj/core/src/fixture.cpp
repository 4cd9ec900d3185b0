#include "selfseg/fixture.hpp"

#include <fstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "selfseg/errors.hpp"
#include "selfseg/label_mask.hpp"
#include "selfseg/synthetic.hpp"

namespace selfseg {
namespace fs = std::filesystem;

namespace {

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ValidationError("cannot write " + path.string());
  out << text;
}

// Ground-truth class of each scene region, and the names the mock segmentor
// may bind that region to, most specific first.
struct RegionClass {
  const char* gt;
  std::vector<std::string> names;
};
const std::vector<RegionClass> kRegions = {
    {"background", {}},
    {"dog", {"puppy", "dog"}},
    {"person", {"man", "woman", "person"}},
    {"car", {"car", "taxi", "vehicle"}},
    {"bicycle", {"bike", "bicycle"}},
    {"sofa", {"couch", "sofa"}},
};

const std::vector<std::string> kCaptions = {
    "a puppy sitting on the grass next to a car",
    "a man riding a bike down the street",
    "a woman standing beside a taxi",
    "a dog lying on a couch",
    "two men walking past a parked vehicle",
    "a puppy playing with a ball in the park",
    "a blurry photo of a road with trees",
    "a bicycle leaning against a wall",
    "a person holding an umbrella in the rain",
    "a close up of a cloud in the sky",
};

}  // namespace

fs::path write_fixture_dataset(const fs::path& dir, const FixtureDatasetParams& params) {
  if (params.n_images < 0 || params.image_size < 8) throw ValidationError("fixture: bad parameters");
  for (const char* sub : {"embeddings", "gt", "mock/segmentor"}) fs::create_directories(dir / sub);

  nlohmann::ordered_json manifest;
  manifest["images"] = nlohmann::ordered_json::array();
  const int n = params.image_size;
  for (int i = 0; i < params.n_images; ++i) {
    const std::string id = "img" + std::to_string(i);
    SyntheticSceneParams sp;
    sp.seed = params.seed * 1000 + static_cast<std::uint64_t>(i);
    sp.n_regions = 3 + i % 3;
    const SyntheticScene scene(sp);

    nlohmann::ordered_json entry;
    entry["id"] = id;
    for (const auto& [tag, grid] : scene.grids()) {
      const std::string rel = "embeddings/" + id + "." + tag + ".peg";
      write_peg(dir / rel, grid);
      entry["embeddings"][tag] = rel;
    }
    entry["image"] = "images/" + id + ".png";
    entry["gt"] = "gt/" + id + ".pgm";

    const std::vector<int> regions = scene.region_raster(n, n);
    LabelMask gt;
    gt.height = gt.width = n;
    gt.labels = regions;
    gt.vocabulary[0] = "background";
    for (int r = 1; r < scene.n_regions(); ++r) gt.vocabulary[r] = kRegions[static_cast<std::size_t>(r)].gt;
    write_label_mask(dir / "gt" / (id + ".pgm"), gt);

    write_text(dir / "mock/segmentor" / (id + ".regions.pgm"), encode_pgm(n, n, regions));
    nlohmann::ordered_json seg;
    seg["mask"] = id + ".regions.pgm";
    seg["regions"] = nlohmann::ordered_json::object();
    for (int r = 1; r < scene.n_regions(); ++r) seg["regions"][std::to_string(r)] = kRegions[static_cast<std::size_t>(r)].names;
    write_text(dir / "mock/segmentor" / (id + ".json"), seg.dump(2) + "\n");

    manifest["images"].push_back(entry);
  }
  write_text(dir / "manifest.json", manifest.dump(2) + "\n");

  write_text(dir / "mock/decoder.json", nlohmann::ordered_json{{"captions", kCaptions}}.dump(2) + "\n");

  nlohmann::ordered_json rules = nlohmann::ordered_json::array();
  for (const auto& [noun, answer] : std::vector<std::pair<const char*, const char*>>{
           {"puppy", "'dog'"}, {"man", "'person'"}, {"men", "'person'"}, {"woman", "'person'"},
           {"taxi", "'car'"}, {"vehicle", "'car, bus'"}, {"bike", "'bicycle'"}, {"couch", "'sofa'"},
           {"cloud", "'nebula'"}})
    rules.push_back({{"contains", std::string("\n") + noun + " exclusively"}, {"response", answer}});
  write_text(dir / "mock/llm.json",
             nlohmann::ordered_json{{"rules", rules}, {"default", "'background'"}}.dump(2) + "\n");

  write_text(dir / "config.ini",
             "[evaluate]\n"
             "dataset = voc\n"
             "\n"
             "[caption]\n"
             "cycles = 3\n"
             "\n"
             "[guide]\n"
             "image_height = " + std::to_string(n) + "\n"
             "image_width = " + std::to_string(n) + "\n"
             "\n"
             "[mock]\n"
             "enabled = true\n"
             "decoder_fixture = mock/decoder.json\n"
             "segmentor_dir = mock/segmentor\n"
             "llm_fixture = mock/llm.json\n");
  return dir / "manifest.json";
}

}  // namespace selfseg
