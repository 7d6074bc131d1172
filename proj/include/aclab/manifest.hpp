#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace aclab {

// Every CLI run writes manifest.json next to its artifacts: the effective
// settings, the seed, and a sha256 per emitted file, so reruns are checkable
// and tampering is detectable.
void writeManifest(const std::filesystem::path& outDir,
                   const std::string& command,
                   const std::map<std::string, std::string>& settings,
                   uint64_t seed,
                   const std::vector<std::filesystem::path>& artifacts);

// Recomputes artifact hashes against a manifest; returns the relative paths
// that do not match (empty means intact).
std::vector<std::string> verifyManifest(
    const std::filesystem::path& manifestPath);

}  // namespace aclab
