#include <array>
#include <string>
#include <system_error>

#include "clic/error.hpp"
#include "clic/image_io.hpp"
#include "clic/rcm.hpp"

namespace clic {

ExpandResult expand_dataset(const Manifest& manifest, int c, Rng& rng,
                            const std::filesystem::path& out_dir, bool keep_originals) {
    if (c < 2) {
        throw InvalidC("c must be at least 2, got " + std::to_string(c));
    }
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec || !std::filesystem::is_directory(out_dir)) {
        throw IoError("cannot create output directory " + out_dir.string());
    }

    ExpandResult result;
    for (std::size_t i = 0; i < manifest.entries.size(); ++i) {
        const auto& entry = manifest.entries[i];
        Rng entry_rng = rng.derive(i);
        try {
            const Image img = load_image(entry.path);
            const std::string stem = std::filesystem::path(entry.path).stem().string();
            const auto samples = rcm_positives(img, c, entry_rng, entry.effective_id());
            std::array<int, 3> level_index{0, 0, 0};
            for (const auto& sample : samples) {
                const int idx = level_index[static_cast<std::size_t>(sample.scale_level)]++;
                const std::string name = stem + "_rcm_" + std::to_string(sample.scale_level) +
                                         "_" + std::to_string(idx) + ".png";
                const auto out_path = out_dir / name;
                write_png(sample.canvas, out_path);
                ManifestEntry generated;
                generated.path = out_path.generic_string();
                generated.id = stem + "_rcm_" + std::to_string(sample.scale_level) + "_" +
                               std::to_string(idx);
                result.manifest.entries.push_back(std::move(generated));
            }
            if (keep_originals) {
                result.manifest.entries.push_back(entry);
            }
        } catch (const Error& e) {
            result.failures.emplace_back(entry.path, e.what());
        }
    }
    return result;
}

}  // namespace clic
