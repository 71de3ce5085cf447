#pragma once

#include <cstdint>
#include <string>

namespace basisrisk {

// Minimal SHA-256, used to fingerprint result files in the run manifest.
class Sha256 {
 public:
  Sha256();
  void update(const void* data, std::size_t len);
  std::string hex_digest();  // finalizes; call once

  static std::string of_file(const std::string& path);
  static std::string of_string(const std::string& data);

 private:
  void process_block(const std::uint8_t* block);
  std::uint32_t h_[8];
  std::uint8_t buffer_[64];
  std::size_t buffer_len_ = 0;
  std::uint64_t total_len_ = 0;
};

}  // namespace basisrisk
