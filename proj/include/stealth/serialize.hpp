#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "stealth/model.hpp"

namespace stealth {

/// Canonical JSON bytes: keys sorted lexicographically, no insignificant
/// whitespace, floating-point numbers at 17 significant digits (%.17g),
/// negative zero normalized to 0. This is the byte stream the model hash is
/// defined over.
std::string canonical_dump(const nlohmann::json& j);

nlohmann::json model_to_json(const Network& net);
Network model_from_json(const nlohmann::json& j);

Network load_model(const std::filesystem::path& path);
void save_model(const Network& net, const std::filesystem::path& path);

/// Shared schema for raw input vectors and precomputed latents:
/// {"dim": n, "vectors": [[..], ..]}.
struct VectorSet {
  int dim = 0;
  std::vector<Vec> vectors;
};

VectorSet load_vectors(const std::filesystem::path& path);
void save_vectors(const VectorSet& set, const std::filesystem::path& path);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const std::string& bytes);

}  // namespace stealth
