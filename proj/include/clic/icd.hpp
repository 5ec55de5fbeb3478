#pragma once

#include <string>
#include <utility>
#include <vector>

#include "clic/finetune.hpp"
#include "clic/manifest.hpp"

namespace clic {

struct ScoredEntry {
    std::string path;
    double score = 0.0;
    std::string id;
};

/// Per-image complexity scores plus the scorer that produced them.
struct ScoredManifest {
    std::string scorer;
    std::vector<ScoredEntry> entries;
    /// (path, reason) for entries that failed to decode or score.
    std::vector<std::pair<std::string, std::string>> failures;
};

/// All resolvable scorer names: the heuristics plus "clic".
std::vector<std::string> scorer_registry();

/// Scores every decodable manifest entry with the named scorer; failures are
/// recorded and skipped. The "clic" scorer needs the trained encoder and
/// head. Throws UnknownScorer for unregistered names and UsageError when
/// "clic" is requested without its parameters. With jobs > 1 entries are
/// scored on that many threads; output order stays the manifest order.
ScoredManifest score_dataset(const Manifest& manifest, const std::string& scorer,
                             const EncoderParams* encoder = nullptr,
                             const RegressionHead* head = nullptr, int jobs = 1);

/// Uniform bins over [0, 1]; a score of exactly 1 lands in the last bin.
struct Histogram {
    std::vector<int> counts;
    std::vector<double> edges;  // counts.size() + 1 ascending edges
};

Histogram histogram(const std::vector<double>& scores, int bins);

struct NormalFit {
    double mu = 0.0;
    double sigma = 0.0;  // population standard deviation
    int n = 0;
    double ks = 0.0;  // sup |empirical CDF - fitted normal CDF|
    bool degenerate = false;
};

/// Moment fit plus the Kolmogorov-Smirnov distance to the fitted normal.
/// Constant input yields sigma 0 and the degenerate flag. Throws
/// InsufficientData below two scores.
NormalFit fit_normal(const std::vector<double>& scores);

struct Strata {
    Manifest low;
    Manifest high;
    Manifest mid;
};

/// Partitions by strict inequality: score < lo goes low, score > hi goes
/// high, the rest mid. Throws BadThresholds unless lo < hi.
Strata stratify(const ScoredManifest& scored, double lo = 0.3, double hi = 0.7);

}  // namespace clic
