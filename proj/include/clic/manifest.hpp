#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace clic {

/// One dataset record: an image path plus an optional [0,1] label and id.
struct ManifestEntry {
    std::string path;
    std::optional<double> score;
    std::string id;

    /// The explicit id, or the path stem when none was given.
    std::string effective_id() const;
};

/// JSON-lines dataset listing, one {"path", "score"?, "id"?} object per line.
struct Manifest {
    std::vector<ManifestEntry> entries;

    std::size_t size() const { return entries.size(); }
    bool empty() const { return entries.empty(); }
};

/// Parses a JSON-lines manifest. Blank lines are skipped; malformed lines,
/// empty paths, or out-of-range scores raise UsageError.
Manifest read_manifest(const std::filesystem::path& path);

void write_manifest(const Manifest& manifest, const std::filesystem::path& path);

}  // namespace clic
