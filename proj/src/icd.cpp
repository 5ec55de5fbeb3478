#include "clic/icd.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <thread>

#include "clic/error.hpp"
#include "clic/heuristics.hpp"
#include "clic/image_io.hpp"

namespace clic {

std::vector<std::string> scorer_registry() {
    auto names = heuristic_scorer_names();
    names.push_back("clic");
    return names;
}

namespace {

struct ScoreSlot {
    bool ok = false;
    double score = 0.0;
    std::string reason;
};

}  // namespace

ScoredManifest score_dataset(const Manifest& manifest, const std::string& scorer,
                             const EncoderParams* encoder, const RegressionHead* head,
                             int jobs) {
    const auto registry = scorer_registry();
    if (std::find(registry.begin(), registry.end(), scorer) == registry.end()) {
        std::string known;
        for (const auto& name : registry) {
            known += known.empty() ? name : ", " + name;
        }
        throw UnknownScorer("unknown scorer \"" + scorer + "\" (known: " + known + ")");
    }
    const bool learned = scorer == "clic";
    if (learned && (encoder == nullptr || head == nullptr)) {
        throw UsageError("the clic scorer needs an encoder and head checkpoint");
    }

    const std::size_t n = manifest.size();
    std::vector<ScoreSlot> slots(n);
    auto score_range = [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            try {
                const Image img = load_image(manifest.entries[i].path);
                const ICScore score =
                    learned ? predict_ic(*encoder, *head, img) : score_with(scorer, img);
                slots[i] = {true, score.value, ""};
            } catch (const Error& e) {
                slots[i] = {false, 0.0, e.what()};
            }
        }
    };

    jobs = std::clamp(jobs, 1, static_cast<int>(std::max<std::size_t>(1, n)));
    if (jobs == 1) {
        score_range(0, n);
    } else {
        std::vector<std::thread> workers;
        workers.reserve(static_cast<std::size_t>(jobs));
        const std::size_t chunk = (n + static_cast<std::size_t>(jobs) - 1) / jobs;
        for (int t = 0; t < jobs; ++t) {
            const std::size_t begin = std::min(n, static_cast<std::size_t>(t) * chunk);
            const std::size_t end = std::min(n, begin + chunk);
            workers.emplace_back(score_range, begin, end);
        }
        for (auto& worker : workers) {
            worker.join();
        }
    }

    ScoredManifest scored;
    scored.scorer = scorer;
    scored.entries.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto& entry = manifest.entries[i];
        if (slots[i].ok) {
            scored.entries.push_back({entry.path, slots[i].score, entry.effective_id()});
        } else {
            scored.failures.emplace_back(entry.path, slots[i].reason);
        }
    }
    return scored;
}

Histogram histogram(const std::vector<double>& scores, int bins) {
    if (bins < 1) {
        throw UsageError("histogram needs at least one bin");
    }
    Histogram h;
    h.counts.assign(static_cast<std::size_t>(bins), 0);
    h.edges.resize(static_cast<std::size_t>(bins) + 1);
    for (int i = 0; i <= bins; ++i) {
        h.edges[static_cast<std::size_t>(i)] = static_cast<double>(i) / bins;
    }
    for (double s : scores) {
        int bin = static_cast<int>(std::floor(s * bins));
        bin = std::clamp(bin, 0, bins - 1);
        ++h.counts[static_cast<std::size_t>(bin)];
    }
    return h;
}

namespace {

double normal_cdf(double x, double mu, double sigma) {
    return 0.5 * (1.0 + std::erf((x - mu) / (sigma * std::sqrt(2.0))));
}

}  // namespace

NormalFit fit_normal(const std::vector<double>& scores) {
    const std::size_t n = scores.size();
    if (n < 2) {
        throw InsufficientData("fit_normal needs at least two scores");
    }
    NormalFit fit;
    fit.n = static_cast<int>(n);
    for (double s : scores) {
        fit.mu += s;
    }
    fit.mu /= static_cast<double>(n);
    double var = 0.0;
    for (double s : scores) {
        var += (s - fit.mu) * (s - fit.mu);
    }
    fit.sigma = std::sqrt(var / static_cast<double>(n));

    if (fit.sigma == 0.0) {
        fit.degenerate = true;
        fit.ks = 1.0;  // the fitted distribution has no spread to compare against
        return fit;
    }

    std::vector<double> sorted(scores);
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t i = 0; i < n; ++i) {
        const double cdf = normal_cdf(sorted[i], fit.mu, fit.sigma);
        const double above = static_cast<double>(i + 1) / static_cast<double>(n) - cdf;
        const double below = cdf - static_cast<double>(i) / static_cast<double>(n);
        fit.ks = std::max({fit.ks, above, below});
    }
    return fit;
}

Strata stratify(const ScoredManifest& scored, double lo, double hi) {
    if (!(lo < hi)) {
        throw BadThresholds("stratify needs lo < hi, got lo=" + std::to_string(lo) +
                            " hi=" + std::to_string(hi));
    }
    Strata strata;
    for (const auto& entry : scored.entries) {
        ManifestEntry out;
        out.path = entry.path;
        out.score = entry.score;
        out.id = entry.id;
        if (entry.score < lo) {
            strata.low.entries.push_back(std::move(out));
        } else if (entry.score > hi) {
            strata.high.entries.push_back(std::move(out));
        } else {
            strata.mid.entries.push_back(std::move(out));
        }
    }
    return strata;
}

}  // namespace clic
