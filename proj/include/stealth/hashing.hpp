#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "stealth/model.hpp"

namespace stealth {

/// Lowercase hex SHA-256 of a byte string.
std::string sha256_hex(std::string_view bytes);

/// Digest of the model's canonical serialization: invariant under JSON key
/// order and whitespace, sensitive to any weight bit flip.
std::string model_digest(const Network& net);

/// Digest of a file's raw bytes (for run manifests).
std::string file_digest(const std::filesystem::path& path);

}  // namespace stealth
