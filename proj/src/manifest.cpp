#include "aclab/manifest.hpp"

#include <fstream>

#include <json.hpp>

#include "aclab/error.hpp"
#include "aclab/sha256.hpp"

namespace aclab {

void writeManifest(const std::filesystem::path& outDir,
                   const std::string& command,
                   const std::map<std::string, std::string>& settings,
                   uint64_t seed,
                   const std::vector<std::filesystem::path>& artifacts) {
    nlohmann::json files = nlohmann::json::array();
    for (const auto& path : artifacts) {
        files.push_back({{"file", path.filename().string()},
                         {"sha256", sha256HexOfFile(path)}});
    }
    const nlohmann::json doc = {{"command", command},
                                {"seed", seed},
                                {"settings", settings},
                                {"artifacts", files}};
    const auto path = outDir / "manifest.json";
    std::ofstream out(path);
    if (!out) throw IoError("manifest: cannot write " + path.string());
    out << doc.dump(2) << '\n';
}

std::vector<std::string> verifyManifest(
    const std::filesystem::path& manifestPath) {
    std::ifstream in(manifestPath);
    if (!in) throw IoError("manifest: cannot open " + manifestPath.string());
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::parse_error& e) {
        throw IoError("manifest: malformed " + manifestPath.string() + ": " +
                      e.what());
    }
    std::vector<std::string> mismatched;
    const auto dir = manifestPath.parent_path();
    for (const auto& entry : doc.at("artifacts")) {
        const std::string file = entry.at("file").get<std::string>();
        const std::string expected = entry.at("sha256").get<std::string>();
        std::string actual;
        try {
            actual = sha256HexOfFile(dir / file);
        } catch (const IoError&) {
            actual = "<missing>";
        }
        if (actual != expected) mismatched.push_back(file);
    }
    return mismatched;
}

}  // namespace aclab
