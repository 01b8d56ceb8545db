#include "stealth/manifest.hpp"

#include <chrono>

#include "stealth/rng.hpp"
#include "stealth/serialize.hpp"

namespace stealth {

nlohmann::json manifest_to_json(const RunManifest& manifest) {
  nlohmann::json j;
  j["command"] = manifest.command;
  j["parameters"] = manifest.parameters;
  j["rng_algorithm"] = kRngAlgorithm;
  j["seeds"] = manifest.seeds;
  nlohmann::json digests = nlohmann::json::object();
  for (const auto& [path, digest] : manifest.input_digests) digests[path] = digest;
  j["input_digests"] = std::move(digests);
  j["toolkit_version"] = kToolkitVersion;
  const auto now = std::chrono::system_clock::now();
  j["timestamp_unix_ms"] =
      std::chrono::duration_cast<std::chrono::milliseconds>(now.time_since_epoch())
          .count();
  return j;
}

void write_manifest(const RunManifest& manifest,
                    const std::filesystem::path& path) {
  write_file(path, manifest_to_json(manifest).dump(2) + "\n");
}

}  // namespace stealth
