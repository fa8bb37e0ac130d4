#ifndef SATKIT_UTIL_DIGEST_HPP
#define SATKIT_UTIL_DIGEST_HPP

#include <openssl/evp.h>

#include <array>
#include <stdexcept>
#include <string>

namespace satkit {

/// SHA-256 of `data`, hex-encoded.
inline std::string sha256_hex(const std::string& data) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> out{};
  unsigned int out_len = 0;
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  if (!ctx) throw std::runtime_error("EVP_MD_CTX_new failed");
  bool ok = EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr) == 1 &&
            EVP_DigestUpdate(ctx, data.data(), data.size()) == 1 &&
            EVP_DigestFinal_ex(ctx, out.data(), &out_len) == 1;
  EVP_MD_CTX_free(ctx);
  if (!ok) throw std::runtime_error("sha256 failed");
  static const char* hex = "0123456789abcdef";
  std::string s;
  s.reserve(out_len * 2);
  for (unsigned int i = 0; i < out_len; ++i) {
    s.push_back(hex[out[i] >> 4]);
    s.push_back(hex[out[i] & 0xf]);
  }
  return s;
}

}  // namespace satkit

#endif  // SATKIT_UTIL_DIGEST_HPP
