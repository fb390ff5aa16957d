#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "lasrl/optim.hpp"

namespace lasrl {

// Binary container layout (all integers little-endian):
//   "LASRLCKP"                      8-byte magic
//   u32 format version
//   u32 n, n bytes                  model config (JSON text)
//   u32 n, n bytes                  SHA-256 hex digest of the config text
//   u32 group count
//   per group:
//     u32 n, n bytes                name
//     u64 rows, u64 cols
//     u8 frozen
//     rows*cols IEEE-754 binary64   payload, little-endian
inline constexpr std::uint32_t kCheckpointVersion = 1;

struct Checkpoint {
  std::string config_json;
  std::vector<ParamGroup> groups;
};

std::string encode_checkpoint(const std::string& config_json, std::span<const ParamGroup> groups);
Checkpoint decode_checkpoint(const std::string& bytes);

void write_checkpoint(const std::filesystem::path& path, const std::string& config_json,
                      std::span<const ParamGroup> groups);
Checkpoint read_checkpoint(const std::filesystem::path& path);

}  // namespace lasrl
