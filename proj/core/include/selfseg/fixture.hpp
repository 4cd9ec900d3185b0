#pragma once

#include <cstdint>
#include <filesystem>

namespace selfseg {

/// Self-contained mock dataset built from synthetic scenes: embeddings at
/// both default resolutions, ground-truth masks with VOC class names, and
/// fixtures for the three mock services.
struct FixtureDatasetParams {
  int n_images = 3;
  int image_size = 64;
  std::uint64_t seed = 7;
};

/// Writes into `dir`:
///   manifest.json, config.ini (mock mode, VOC vocabulary),
///   embeddings/<id>.<tag>.peg, gt/<id>.pgm (+ .vocab.json),
///   mock/decoder.json, mock/llm.json, mock/segmentor/<id>.json + <id>.regions.pgm
/// Returns the manifest path.
std::filesystem::path write_fixture_dataset(const std::filesystem::path& dir, const FixtureDatasetParams& params = {});

}  // namespace selfseg
