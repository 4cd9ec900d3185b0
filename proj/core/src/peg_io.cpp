#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "selfseg/embedding_grid.hpp"
#include "selfseg/errors.hpp"

namespace selfseg {
namespace {

std::uint32_t to_little_endian(std::uint32_t v) {
  if constexpr (std::endian::native == std::endian::big)
    v = ((v & 0xffu) << 24) | ((v & 0xff00u) << 8) | ((v >> 8) & 0xff00u) | (v >> 24);
  return v;
}

}  // namespace

PatchEmbeddingGrid parse_peg(std::string_view bytes) {
  const auto newline = bytes.find('\n');
  if (newline == std::string_view::npos) throw ValidationError("peg: missing header line");
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(bytes.substr(0, newline));
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("peg: bad header: ") + e.what());
  }
  PatchEmbeddingGrid grid;
  try {
    if (header.at("version").get<int>() != 1) throw ValidationError("peg: unsupported version");
    if (header.at("dtype").get<std::string>() != "f32le") throw ValidationError("peg: unsupported dtype");
    grid.height = header.at("height").get<int>();
    grid.width = header.at("width").get<int>();
    grid.dim = header.at("dim").get<int>();
    grid.resolution_tag = header.at("resolution_tag").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("peg: bad header field: ") + e.what());
  }
  if (grid.height <= 0 || grid.width <= 0 || grid.dim <= 0)
    throw ValidationError("peg: non-positive dimensions");
  const std::size_t count = static_cast<std::size_t>(grid.height) * grid.width * grid.dim;
  const auto payload = bytes.substr(newline + 1);
  if (payload.size() != count * 4)
    throw ValidationError("peg: payload has " + std::to_string(payload.size()) + " bytes, expected " +
                          std::to_string(count * 4));
  grid.data.resize(count);
  for (std::size_t i = 0; i < count; ++i) {
    std::uint32_t raw;
    std::memcpy(&raw, payload.data() + i * 4, 4);
    grid.data[i] = std::bit_cast<float>(to_little_endian(raw));
  }
  grid.validate();
  return grid;
}

std::string serialize_peg(const PatchEmbeddingGrid& grid) {
  grid.validate();
  nlohmann::ordered_json header = {{"version", 1},
                                   {"height", grid.height},
                                   {"width", grid.width},
                                   {"dim", grid.dim},
                                   {"resolution_tag", grid.resolution_tag},
                                   {"dtype", "f32le"}};
  std::string out = header.dump();
  out.push_back('\n');
  const std::size_t offset = out.size();
  out.resize(offset + grid.data.size() * 4);
  for (std::size_t i = 0; i < grid.data.size(); ++i) {
    const std::uint32_t raw = to_little_endian(std::bit_cast<std::uint32_t>(grid.data[i]));
    std::memcpy(out.data() + offset + i * 4, &raw, 4);
  }
  return out;
}

PatchEmbeddingGrid read_peg(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw NotFoundError("peg: cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_peg(ss.str());
}

void write_peg(const std::filesystem::path& path, const PatchEmbeddingGrid& grid) {
  const std::string bytes = serialize_peg(grid);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ValidationError("peg: cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

}  // namespace selfseg
