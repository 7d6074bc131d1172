#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace aclab {

// Flat key-value experiment configuration with [section] headers, one
// experiment per file. '#' starts a comment. Every key must be consumed by
// the command that runs the file; leftovers are rejected before any
// computation starts.
class ConfigFile {
  public:
    static ConfigFile parse(const std::filesystem::path& path);
    static ConfigFile parseText(const std::string& text,
                                const std::string& origin = "<inline>");

    bool has(const std::string& section, const std::string& key) const;

    std::string getString(const std::string& section, const std::string& key,
                          const std::string& fallback);
    std::string require(const std::string& section, const std::string& key);
    double getDouble(const std::string& section, const std::string& key,
                     double fallback);
    size_t getSize(const std::string& section, const std::string& key,
                   size_t fallback);
    uint64_t getU64(const std::string& section, const std::string& key,
                    uint64_t fallback);
    bool getBool(const std::string& section, const std::string& key,
                 bool fallback);
    // Comma-separated doubles.
    std::vector<double> getDoubleList(const std::string& section,
                                      const std::string& key,
                                      const std::vector<double>& fallback);

    // Throws ConfigError naming every key that no command consumed.
    void ensureConsumed() const;

    // Effective settings echo for the run manifest.
    std::map<std::string, std::string> flattened() const;

  private:
    struct Entry {
        std::string value;
        mutable bool consumed = false;
    };
    std::string origin_;
    std::map<std::string, std::map<std::string, Entry>> sections_;

    const Entry* find(const std::string& section, const std::string& key) const;
};

}  // namespace aclab
