#include "clic/manifest.hpp"

#include <fstream>

#include <json.hpp>

#include "clic/error.hpp"

namespace clic {

std::string ManifestEntry::effective_id() const {
    if (!id.empty()) {
        return id;
    }
    return std::filesystem::path(path).stem().string();
}

Manifest read_manifest(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw UsageError("cannot open manifest " + path.string());
    }
    Manifest manifest;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) {
            continue;
        }
        nlohmann::json record;
        try {
            record = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw UsageError(path.string() + ":" + std::to_string(lineno) +
                             ": bad JSON record: " + e.what());
        }
        ManifestEntry entry;
        if (!record.contains("path") || !record["path"].is_string() ||
            record["path"].get<std::string>().empty()) {
            throw UsageError(path.string() + ":" + std::to_string(lineno) +
                             ": record needs a nonempty \"path\"");
        }
        entry.path = record["path"].get<std::string>();
        if (record.contains("score") && !record["score"].is_null()) {
            if (!record["score"].is_number()) {
                throw UsageError(path.string() + ":" + std::to_string(lineno) +
                                 ": score must be a number");
            }
            const double s = record["score"].get<double>();
            if (s < 0.0 || s > 1.0) {
                throw UsageError(path.string() + ":" + std::to_string(lineno) +
                                 ": score " + std::to_string(s) + " outside [0,1]");
            }
            entry.score = s;
        }
        if (record.contains("id") && record["id"].is_string()) {
            entry.id = record["id"].get<std::string>();
        }
        manifest.entries.push_back(std::move(entry));
    }
    return manifest;
}

void write_manifest(const Manifest& manifest, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) {
        throw IoError("cannot write manifest " + path.string());
    }
    for (const auto& entry : manifest.entries) {
        nlohmann::ordered_json record;
        record["path"] = entry.path;
        if (entry.score) {
            record["score"] = *entry.score;
        }
        if (!entry.id.empty()) {
            record["id"] = entry.id;
        }
        out << record.dump() << "\n";
    }
    if (!out) {
        throw IoError("short write to " + path.string());
    }
}

}  // namespace clic
