#include "clic/heuristics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>

#include <zlib.h>

#include "clic/error.hpp"

namespace clic {

ICScore shannon_entropy(const GrayImage& img) {
    if (img.empty()) {
        throw EmptyDataset("entropy of an empty image");
    }
    std::array<std::size_t, 256> counts{};
    for (float v : img.pixels) {
        const long bin = std::lroundf(v * 255.0f);
        counts[static_cast<std::size_t>(std::min(255L, std::max(0L, bin)))]++;
    }
    const double n = static_cast<double>(img.pixels.size());
    double entropy_bits = 0.0;
    for (std::size_t count : counts) {
        if (count == 0) {
            continue;
        }
        const double p = static_cast<double>(count) / n;
        entropy_bits -= p * std::log2(p);
    }
    return ICScore{entropy_bits / 8.0};
}

ICScore edge_density(const GrayImage& img) {
    if (img.width < 3 || img.height < 3) {
        throw ImageTooSmall("edge density needs at least 3x3, got " +
                            std::to_string(img.width) + "x" + std::to_string(img.height));
    }
    const int w = img.width;
    const int h = img.height;
    std::vector<double> magnitude(static_cast<std::size_t>(w - 2) * (h - 2));
    double max_mag = 0.0;
    std::size_t idx = 0;
    for (int y = 1; y < h - 1; ++y) {
        for (int x = 1; x < w - 1; ++x) {
            const double gx = -img.at(x - 1, y - 1) + img.at(x + 1, y - 1) -
                              2.0 * img.at(x - 1, y) + 2.0 * img.at(x + 1, y) -
                              img.at(x - 1, y + 1) + img.at(x + 1, y + 1);
            const double gy = -img.at(x - 1, y - 1) - 2.0 * img.at(x, y - 1) -
                              img.at(x + 1, y - 1) + img.at(x - 1, y + 1) +
                              2.0 * img.at(x, y + 1) + img.at(x + 1, y + 1);
            const double g = std::sqrt(gx * gx + gy * gy);
            magnitude[idx++] = g;
            max_mag = std::max(max_mag, g);
        }
    }
    if (max_mag == 0.0) {
        return ICScore{0.0};
    }
    const double threshold = 0.1 * max_mag;
    std::size_t above = 0;
    for (double g : magnitude) {
        if (g > threshold) {
            ++above;
        }
    }
    return ICScore{static_cast<double>(above) / static_cast<double>(magnitude.size())};
}

ICScore compression_ratio(const Image& img) {
    if (img.empty()) {
        throw EmptyDataset("compression ratio of an empty image");
    }
    std::vector<std::uint8_t> raw;
    raw.reserve(img.pixels.size());
    for (float v : img.pixels) {
        const long q = std::lroundf(v * 255.0f);
        raw.push_back(static_cast<std::uint8_t>(std::min(255L, std::max(0L, q))));
    }
    uLongf compressed_size = compressBound(static_cast<uLong>(raw.size()));
    std::vector<std::uint8_t> compressed(compressed_size);
    const int rc = compress2(compressed.data(), &compressed_size, raw.data(),
                             static_cast<uLong>(raw.size()), Z_DEFAULT_COMPRESSION);
    if (rc != Z_OK) {
        throw Error("deflate failed with code " + std::to_string(rc));
    }
    const double ratio = static_cast<double>(compressed_size) / static_cast<double>(raw.size());
    return ICScore{std::min(1.0, ratio)};
}

std::vector<std::string> heuristic_scorer_names() { return {"entropy", "edge", "compress"}; }

ICScore score_with(const std::string& scorer, const Image& img) {
    if (scorer == "entropy") {
        return shannon_entropy(to_grayscale(img));
    }
    if (scorer == "edge") {
        return edge_density(to_grayscale(img));
    }
    if (scorer == "compress") {
        return compression_ratio(img);
    }
    throw UnknownScorer("unknown scorer '" + scorer + "'");
}

}  // namespace clic
