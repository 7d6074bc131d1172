#include "aclab/config.hpp"

#include <fstream>
#include <sstream>

#include "aclab/error.hpp"

namespace aclab {

namespace {

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) return "";
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

}  // namespace

ConfigFile ConfigFile::parse(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("config: cannot open " + path.string());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parseText(buffer.str(), path.string());
}

ConfigFile ConfigFile::parseText(const std::string& text,
                                 const std::string& origin) {
    ConfigFile cfg;
    cfg.origin_ = origin;
    std::istringstream in(text);
    std::string line;
    std::string section;
    size_t lineNo = 0;
    while (std::getline(in, line)) {
        ++lineNo;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']' || line.size() < 3) {
                throw ConfigError(origin + ":" + std::to_string(lineNo) +
                                  ": malformed section header '" + line + "'");
            }
            section = trim(line.substr(1, line.size() - 2));
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError(origin + ":" + std::to_string(lineNo) +
                              ": expected key = value, got '" + line + "'");
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty()) {
            throw ConfigError(origin + ":" + std::to_string(lineNo) +
                              ": empty key");
        }
        auto& sec = cfg.sections_[section];
        if (sec.count(key)) {
            throw ConfigError(origin + ":" + std::to_string(lineNo) +
                              ": duplicate key '" + key + "' in [" + section +
                              "]");
        }
        sec[key] = Entry{value, false};
    }
    return cfg;
}

const ConfigFile::Entry* ConfigFile::find(const std::string& section,
                                          const std::string& key) const {
    const auto sec = sections_.find(section);
    if (sec == sections_.end()) return nullptr;
    const auto it = sec->second.find(key);
    if (it == sec->second.end()) return nullptr;
    return &it->second;
}

bool ConfigFile::has(const std::string& section, const std::string& key) const {
    return find(section, key) != nullptr;
}

std::string ConfigFile::getString(const std::string& section,
                                  const std::string& key,
                                  const std::string& fallback) {
    const Entry* entry = find(section, key);
    if (!entry) return fallback;
    entry->consumed = true;
    return entry->value;
}

std::string ConfigFile::require(const std::string& section,
                                const std::string& key) {
    const Entry* entry = find(section, key);
    if (!entry) {
        throw ConfigError(origin_ + ": missing required key '" + key +
                          "' in [" + section + "]");
    }
    entry->consumed = true;
    return entry->value;
}

double ConfigFile::getDouble(const std::string& section, const std::string& key,
                             double fallback) {
    const Entry* entry = find(section, key);
    if (!entry) return fallback;
    entry->consumed = true;
    try {
        size_t used = 0;
        const double v = std::stod(entry->value, &used);
        if (used != entry->value.size()) throw std::invalid_argument("trail");
        return v;
    } catch (const std::exception&) {
        throw ConfigError(origin_ + ": key '" + key + "' in [" + section +
                          "] is not a number: '" + entry->value + "'");
    }
}

size_t ConfigFile::getSize(const std::string& section, const std::string& key,
                           size_t fallback) {
    const Entry* entry = find(section, key);
    if (!entry) return fallback;
    entry->consumed = true;
    try {
        size_t used = 0;
        const unsigned long long v = std::stoull(entry->value, &used);
        if (used != entry->value.size()) throw std::invalid_argument("trail");
        return static_cast<size_t>(v);
    } catch (const std::exception&) {
        throw ConfigError(origin_ + ": key '" + key + "' in [" + section +
                          "] is not a count: '" + entry->value + "'");
    }
}

uint64_t ConfigFile::getU64(const std::string& section, const std::string& key,
                            uint64_t fallback) {
    return static_cast<uint64_t>(getSize(section, key, fallback));
}

bool ConfigFile::getBool(const std::string& section, const std::string& key,
                         bool fallback) {
    const Entry* entry = find(section, key);
    if (!entry) return fallback;
    entry->consumed = true;
    if (entry->value == "true" || entry->value == "1") return true;
    if (entry->value == "false" || entry->value == "0") return false;
    throw ConfigError(origin_ + ": key '" + key + "' in [" + section +
                      "] is not a boolean: '" + entry->value + "'");
}

std::vector<double> ConfigFile::getDoubleList(
    const std::string& section, const std::string& key,
    const std::vector<double>& fallback) {
    const Entry* entry = find(section, key);
    if (!entry) return fallback;
    entry->consumed = true;
    std::vector<double> values;
    std::istringstream in(entry->value);
    std::string item;
    while (std::getline(in, item, ',')) {
        item = trim(item);
        if (item.empty()) continue;
        try {
            values.push_back(std::stod(item));
        } catch (const std::exception&) {
            throw ConfigError(origin_ + ": key '" + key + "' in [" + section +
                              "] has a non-numeric item: '" + item + "'");
        }
    }
    if (values.empty()) {
        throw ConfigError(origin_ + ": key '" + key + "' in [" + section +
                          "] is an empty list");
    }
    return values;
}

void ConfigFile::ensureConsumed() const {
    std::string unknown;
    for (const auto& [section, entries] : sections_) {
        for (const auto& [key, entry] : entries) {
            if (!entry.consumed) {
                if (!unknown.empty()) unknown += ", ";
                unknown += "[" + section + "] " + key;
            }
        }
    }
    if (!unknown.empty()) {
        throw ConfigError(origin_ + ": unknown key(s): " + unknown);
    }
}

std::map<std::string, std::string> ConfigFile::flattened() const {
    std::map<std::string, std::string> flat;
    for (const auto& [section, entries] : sections_) {
        for (const auto& [key, entry] : entries) {
            flat[section.empty() ? key : section + "." + key] = entry.value;
        }
    }
    return flat;
}

}  // namespace aclab
