#include "stealth/hashing.hpp"

#include <openssl/evp.h>

#include "stealth/serialize.hpp"

namespace stealth {

std::string sha256_hex(std::string_view bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(),
                 nullptr) != 1)
    throw Error("sha256: digest computation failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[digest[i] >> 4];
    out += hex[digest[i] & 0xf];
  }
  return out;
}

std::string model_digest(const Network& net) {
  return sha256_hex(canonical_dump(model_to_json(net)));
}

std::string file_digest(const std::filesystem::path& path) {
  return sha256_hex(read_file(path));
}

}  // namespace stealth
