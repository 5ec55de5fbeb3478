#pragma once

#include <string>
#include <vector>

#include "clic/image.hpp"

namespace clic {

/// Scalar image-complexity score, always inside [0, 1].
struct ICScore {
    double value = 0.0;
};

/// Histogram entropy over 256 intensity bins, normalized by the 8-bit
/// maximum so a perfectly uniform histogram scores 1.
ICScore shannon_entropy(const GrayImage& img);

/// Fraction of interior pixels whose Sobel gradient magnitude exceeds
/// 0.1 * max magnitude; 0 for flat images. Requires at least 3x3 input.
ICScore edge_density(const GrayImage& img);

/// Deflate compressibility of the raw 8-bit pixel buffer: compressed bytes
/// over raw bytes, capped at 1. Flat images approach 0, noise approaches 1.
ICScore compression_ratio(const Image& img);

/// Names of the label-free scorers this module registers ("entropy",
/// "edge", "compress"). The learned "clic" scorer is appended by the
/// dataset-scoring layer, which owns encoder state.
std::vector<std::string> heuristic_scorer_names();

/// Dispatches an Image to a heuristic scorer by name. Throws UnknownScorer.
ICScore score_with(const std::string& scorer, const Image& img);

}  // namespace clic
