#include "clic/synth.hpp"

#include <algorithm>
#include <array>
#include <cstdio>
#include <string>

#include "clic/error.hpp"
#include "clic/heuristics.hpp"
#include "clic/image_io.hpp"

namespace clic {

namespace {

constexpr std::array<const char*, 4> kKinds{"constant", "noise", "stripe", "checkerboard"};

Image blank(int side) {
    Image img;
    img.width = side;
    img.height = side;
    img.channels = 3;
    img.pixels.assign(static_cast<std::size_t>(side) * side * 3, 0.0f);
    return img;
}

void fill_base(Image& img, int kind, Rng& rng) {
    const int side = img.width;
    switch (kind) {
        case 0: {  // constant
            const auto level = static_cast<float>(rng.uniform());
            std::fill(img.pixels.begin(), img.pixels.end(), level);
            break;
        }
        case 1: {  // noise over a random intensity band
            const float lo = static_cast<float>(rng.uniform(0.0, 0.5));
            const float hi = static_cast<float>(rng.uniform(0.5, 1.0));
            for (auto& v : img.pixels) {
                v = lo + static_cast<float>(rng.uniform()) * (hi - lo);
            }
            break;
        }
        case 2: {  // two-level stripes, random period and orientation
            const int period = 2 + static_cast<int>(rng.uniform_int(15));
            const bool vertical = rng.bernoulli(0.5);
            const auto a = static_cast<float>(rng.uniform());
            const auto b = static_cast<float>(rng.uniform());
            for (int y = 0; y < side; ++y) {
                for (int x = 0; x < side; ++x) {
                    const int phase = (vertical ? x : y) / period;
                    const float level = (phase % 2 == 0) ? a : b;
                    for (int c = 0; c < 3; ++c) {
                        img.at(x, y, c) = level;
                    }
                }
            }
            break;
        }
        default: {  // checkerboard, random cell size
            const int cell = 2 + static_cast<int>(rng.uniform_int(15));
            const auto a = static_cast<float>(rng.uniform());
            const auto b = static_cast<float>(rng.uniform());
            for (int y = 0; y < side; ++y) {
                for (int x = 0; x < side; ++x) {
                    const float level = ((x / cell + y / cell) % 2 == 0) ? a : b;
                    for (int c = 0; c < 3; ++c) {
                        img.at(x, y, c) = level;
                    }
                }
            }
            break;
        }
    }
}

}  // namespace

Image synth_image(int index, int side, Rng& rng) {
    const int kind = index % static_cast<int>(kKinds.size());
    Image img = blank(side);
    fill_base(img, kind, rng);

    // Blending in noise spreads measured entropy over the whole [0, 1]
    // range instead of clustering at the pure-pattern values.
    if (kind != 1 && rng.bernoulli(0.5)) {
        const auto alpha = static_cast<float>(rng.uniform(0.05, 0.6));
        for (auto& v : img.pixels) {
            const auto noise = static_cast<float>(rng.uniform());
            v = std::clamp((1.0f - alpha) * v + alpha * noise, 0.0f, 1.0f);
        }
    }
    return img;
}

Manifest synth_corpus(int count, int side, std::uint64_t seed,
                      const std::filesystem::path& out_dir) {
    if (count < 1) {
        throw UsageError("synthetic corpus needs a positive image count");
    }
    if (side < 8) {
        throw UsageError("synthetic images must be at least 8x8");
    }
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec || !std::filesystem::is_directory(out_dir)) {
        throw IoError("cannot create output directory " + out_dir.string());
    }

    Rng root(seed);
    Manifest manifest;
    manifest.entries.reserve(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) {
        Rng img_rng = root.derive(static_cast<std::uint64_t>(i));
        const Image img = synth_image(i, side, img_rng);

        char name[64];
        std::snprintf(name, sizeof(name), "synth_%s_%04d.png",
                      kKinds[static_cast<std::size_t>(i % 4)], i);
        const auto path = out_dir / name;
        write_png(img, path);

        ManifestEntry entry;
        entry.path = path.generic_string();
        entry.score = shannon_entropy(to_grayscale(img)).value;
        entry.id = std::filesystem::path(name).stem().string();
        manifest.entries.push_back(std::move(entry));
    }
    return manifest;
}

}  // namespace clic
