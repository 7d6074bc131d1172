#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace aclab {

// FIPS 180-4 SHA-256, incremental.
class Sha256 {
  public:
    Sha256();
    void update(const void* data, size_t length);
    // Finalizes and returns the lowercase hex digest. One-shot per instance.
    std::string hexDigest();

  private:
    void processBlock(const uint8_t* block);

    uint32_t state_[8];
    uint64_t totalBytes_ = 0;
    uint8_t buffer_[64];
    size_t bufferLen_ = 0;
};

std::string sha256Hex(const void* data, size_t length);
std::string sha256Hex(const std::string& data);
std::string sha256HexOfFile(const std::filesystem::path& path);

}  // namespace aclab
