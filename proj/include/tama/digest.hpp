#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>

namespace tama {

/// Incremental SHA-256 producing a lower-case hex digest.
class Sha256 {
 public:
  Sha256();
  ~Sha256();
  Sha256(const Sha256&) = delete;
  Sha256& operator=(const Sha256&) = delete;

  Sha256& update(std::span<const std::uint8_t> bytes);
  Sha256& update(std::string_view text);
  [[nodiscard]] std::string hex();

 private:
  void* ctx_;
};

[[nodiscard]] std::string sha256_hex(std::string_view text);
[[nodiscard]] std::string base64_encode(std::span<const std::uint8_t> bytes);

}  // namespace tama
