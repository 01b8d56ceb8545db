#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "stealth/common.hpp"

namespace stealth {

/// Everything needed to byte-reproduce a run: command, full parameter set,
/// RNG algorithm and seeds, input-file digests, toolkit version, timestamps.
/// Output files themselves never embed timestamps.
struct RunManifest {
  std::string command;
  nlohmann::json parameters;  // flag name -> parsed value
  std::vector<std::uint64_t> seeds;
  std::vector<std::pair<std::string, std::string>> input_digests;  // path, sha256
};

nlohmann::json manifest_to_json(const RunManifest& manifest);
void write_manifest(const RunManifest& manifest,
                    const std::filesystem::path& path);

}  // namespace stealth
