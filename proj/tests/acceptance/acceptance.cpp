// End-to-end acceptance checks, one printed verdict line per criterion.
// The CLI binary path comes from argv[1] (or the CLIC_BIN environment
// variable); everything else exercises the library directly.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "clic/encoder.hpp"
#include "clic/error.hpp"
#include "clic/finetune.hpp"
#include "clic/fusion.hpp"
#include "clic/heuristics.hpp"
#include "clic/icd.hpp"
#include "clic/image_io.hpp"
#include "clic/manifest.hpp"
#include "clic/metrics.hpp"
#include "clic/moco.hpp"
#include "clic/rcm.hpp"
#include "clic/rng.hpp"
#include "clic/synth.hpp"

namespace fs = std::filesystem;
using namespace clic;

namespace {

fs::path g_scratch;
std::string g_cli;

double now_seconds() {
    using clock = std::chrono::steady_clock;
    static const clock::time_point start = clock::now();
    return std::chrono::duration<double>(clock::now() - start).count();
}

std::string format(const char* fmt, ...) {
    char buf[512];
    va_list args;
    va_start(args, fmt);
    std::vsnprintf(buf, sizeof(buf), fmt, args);
    va_end(args);
    return buf;
}

double cosine(const Embedding& a, const Embedding& b) {
    double dot = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        dot += a[i] * b[i];
    }
    return dot;
}

Embedding random_unit(Rng& rng) {
    Embedding e{};
    double norm = 0.0;
    for (auto& v : e) {
        v = rng.gaussian();
        norm += v * v;
    }
    norm = std::sqrt(norm);
    for (auto& v : e) {
        v /= norm;
    }
    return e;
}

/// 64 synthetic images whose identity survives the augmentation pipeline:
/// stripes and checkerboards are recognizable by period and contrast, which
/// color jitter cannot erase (unlike the level of a constant image).
Manifest structured_corpus(const fs::path& dir, int count, int side, std::uint64_t seed) {
    fs::create_directories(dir);
    Rng root(seed);
    Manifest manifest;
    for (int j = 0; j < count; ++j) {
        const int index = 4 * (j / 2) + 2 + (j % 2);
        Rng img_rng = root.derive(static_cast<std::uint64_t>(index));
        const Image img = synth_image(index, side, img_rng);
        char name[32];
        std::snprintf(name, sizeof(name), "s_%04d.png", j);
        const fs::path path = dir / name;
        write_png(img, path);
        ManifestEntry entry;
        entry.path = path.generic_string();
        entry.id = fs::path(name).stem().string();
        manifest.entries.push_back(std::move(entry));
    }
    return manifest;
}

// --- criterion 1: crop and mixed-sample counts ------------------------------

std::string check_rcm_counts(std::string& detail) {
    Rng rng(3);
    const Image img = synth_image(1, 224, rng);

    const double t0 = now_seconds();
    struct Case {
        int c;
        int crops;
        int mixed;
    };
    for (const Case want : {Case{2, 14, 7}, Case{3, 21, 11}}) {
        const CropPlan plan = plan_crops(img.height, img.width, want.c);
        if (plan.total_crops() != want.crops) {
            return format("plan at c=%d yields %d crops, want %d", want.c, plan.total_crops(),
                          want.crops);
        }
        Rng crop_rng = rng.derive(static_cast<std::uint64_t>(want.c));
        const auto crops = random_crop_set(img, plan, crop_rng);
        if (static_cast<int>(crops.size()) != want.crops) {
            return format("c=%d produced %zu crops, want %d", want.c, crops.size(), want.crops);
        }
        Rng mix_rng = rng.derive(100 + static_cast<std::uint64_t>(want.c));
        const auto samples = rcm_positives(img, want.c, mix_rng);
        if (static_cast<int>(samples.size()) != want.mixed) {
            return format("c=%d produced %zu mixed samples, want %d", want.c, samples.size(),
                          want.mixed);
        }
    }
    const double elapsed = now_seconds() - t0;
    if (elapsed >= 1.0) {
        return format("224x224 crop-and-mix took %.2f s, want < 1 s", elapsed);
    }
    detail = format("c=2: 14 crops / 7 mixed, c=3: 21 / 11, %.3f s", elapsed);
    return {};
}

// --- criterion 2: dataset expansion factors ---------------------------------

std::string check_expansion_factors(std::string& detail) {
    const fs::path dir = g_scratch / "expand_src";
    const Manifest manifest = synth_corpus(20, 96, 11, dir);

    const std::map<int, int> factors{{2, 7}, {3, 11}, {4, 14}, {5, 18}};
    for (const auto& [c, factor] : factors) {
        Rng rng(static_cast<std::uint64_t>(c));
        const fs::path out = g_scratch / ("expand_c" + std::to_string(c));
        const ExpandResult result = expand_dataset(manifest, c, rng, out, false);
        if (!result.failures.empty()) {
            return format("c=%d reported %zu failures on a clean corpus", c,
                          result.failures.size());
        }
        const auto generated = static_cast<int>(result.manifest.entries.size());
        if (generated != 20 * factor) {
            return format("c=%d generated %d images, want exactly %d (20 x %d)", c, generated,
                          20 * factor, factor);
        }
    }
    detail = "20-image corpus -> exactly 7x, 11x, 14x, 18x for c=2,3,4,5";
    return {};
}

// --- criterion 3: momentum update exactness ---------------------------------

std::string check_momentum_update(std::string& detail) {
    std::vector<Image> images;
    Rng img_rng(5);
    for (int i = 0; i < 8; ++i) {
        Rng child = img_rng.derive(static_cast<std::uint64_t>(i));
        images.push_back(synth_image(i, 48, child));
    }

    TrainConfig config;
    config.batch_size = 2;
    config.queue_capacity = 8;
    config.momentum_m = 0.999;
    config.seed = 9;
    TrainState state = init_train_state(config);

    double max_err = 0.0;
    Rng step_root(21);
    for (int step = 0; step < 10; ++step) {
        const EncoderParams key_prev = state.key;
        std::vector<Image> batch(images.begin() + (step * 2) % 8,
                                 images.begin() + (step * 2) % 8 + 2);
        train_step(state, batch, config, config.lr,
                   step_root.derive(static_cast<std::uint64_t>(step)));
        for (std::size_t p = 0; p < state.key.data.size(); ++p) {
            const double expected =
                config.momentum_m * key_prev.data[p] +
                (1.0 - config.momentum_m) * state.query.data[p];
            max_err = std::max(max_err, std::abs(state.key.data[p] - expected));
        }
    }
    if (max_err >= 1e-12) {
        return format("max |theta_k - (m theta_k' + (1-m) theta_q)| = %.3e, want < 1e-12",
                      max_err);
    }
    detail = format("10 steps at m=0.999, max deviation %.1e", max_err);
    return {};
}

// --- criterion 4: queue FIFO residency ---------------------------------------

std::string check_queue_fifo(std::string& detail) {
    constexpr int kCapacity = 256;
    constexpr int kBatch = 32;
    NegativeQueue queue(kCapacity);
    Rng rng(77);

    const auto make_batch = [&rng] {
        std::vector<Embedding> batch;
        for (int i = 0; i < kBatch; ++i) {
            batch.push_back(random_unit(rng));
        }
        return batch;
    };
    const auto contains = [&queue](const Embedding& e) {
        for (const auto& key : queue.keys()) {
            if (key == e) {
                return true;
            }
        }
        return false;
    };

    for (int i = 0; i < kCapacity / kBatch; ++i) {
        queue.enqueue(make_batch());
    }

    auto tagged_batch = make_batch();
    const Embedding tagged = tagged_batch.front();
    queue.enqueue(tagged_batch);
    if (queue.keys().size() != kCapacity) {
        return format("queue holds %zu keys, want %d", queue.keys().size(), kCapacity);
    }
    if (!contains(tagged)) {
        return "tagged key missing immediately after its own enqueue";
    }

    for (int later = 1; later < kCapacity / kBatch; ++later) {
        queue.enqueue(make_batch());
        if (!contains(tagged)) {
            return format("tagged key evicted after %d subsequent enqueues, want %d", later,
                          kCapacity / kBatch);
        }
    }
    queue.enqueue(make_batch());
    if (contains(tagged)) {
        return format("tagged key still present after %d subsequent enqueues",
                      kCapacity / kBatch);
    }
    detail = format("K=%d, B=%d: tagged key lives exactly K/B=%d enqueue cycles", kCapacity,
                    kBatch, kCapacity / kBatch);
    return {};
}

// --- criterion 5: analytic InfoNCE values ------------------------------------

std::string check_infonce_values(std::string& detail) {
    Rng rng(13);
    const Embedding e = random_unit(rng);

    NegativeQueue uniform_queue(64);
    uniform_queue.enqueue(std::vector<Embedding>(64, e));
    const double uniform_loss = info_nce(e, e, uniform_queue, 0.2).loss;
    const double ln_k1 = std::log(65.0);
    if (std::abs(uniform_loss - ln_k1) >= 1e-9) {
        return format("uniform-logit loss %.12f vs ln(K+1) %.12f, want within 1e-9",
                      uniform_loss, ln_k1);
    }

    // One orthogonal negative: logits 1/tau and 0, so the loss is
    // ln(1 + exp(-1/tau)), about 0.0067 at tau = 0.2.
    Embedding q{};
    Embedding negative{};
    q[0] = 1.0;
    negative[1] = 1.0;
    NegativeQueue single(1);
    single.enqueue(std::vector<Embedding>{negative});
    const double worked = info_nce(q, q, single, 0.2).loss;
    const double expected = std::log(1.0 + std::exp(-1.0 / 0.2));
    if (std::abs(expected - 0.0067) > 1e-4) {
        return format("independent worked-example value %.6f drifted from 0.0067", expected);
    }
    if (std::abs(worked - expected) >= 1e-6) {
        return format("K=1 worked example %.9f vs independent %.9f, want within 1e-6", worked,
                      expected);
    }
    detail = format("uniform -> ln(65) within %.1e; K=1 example %.7f vs %.7f",
                    std::abs(uniform_loss - ln_k1), worked, expected);
    return {};
}

// --- criterion 6: finite-difference gradient check ---------------------------

struct LossProbe {
    double loss = 0.0;
    std::vector<char> gates;
};

LossProbe probe_loss(const EncoderParams& params, const Tensor& batch, const Embedding& key,
                     const NegativeQueue& queue, double tau) {
    ForwardTrace trace;
    const auto queries = encoder_forward(params, batch, &trace);
    LossProbe probe;
    probe.loss = multi_positive_loss(queries, key, queue, tau).loss;
    for (const auto& stage : trace.stage_out) {
        for (double v : stage) {
            probe.gates.push_back(v > 0.0 ? 1 : 0);
        }
    }
    for (double v : trace.fc1_out) {
        probe.gates.push_back(v > 0.0 ? 1 : 0);
    }
    return probe;
}

std::string check_gradients(std::string& detail) {
    const double t0 = now_seconds();
    Rng rng(31);
    EncoderParams params = EncoderParams::centered_init(rng);

    Rng img_rng(32);
    const Image img = synth_image(2, 96, img_rng);
    Rng crop_rng(33);
    const auto samples = rcm_positives(img, 2, crop_rng);
    std::vector<Image> canvases;
    for (const auto& sample : samples) {
        canvases.push_back(sample.canvas);
    }
    const Tensor batch = batch_from_images(canvases);

    Rng key_rng(34);
    const Embedding key = random_unit(key_rng);
    NegativeQueue queue = NegativeQueue::random_init(8, key_rng);
    const double tau = 0.2;

    ForwardTrace trace;
    const auto queries = encoder_forward(params, batch, &trace);
    const auto combined = multi_positive_loss(queries, key, queue, tau);
    const EncoderParams analytic = encoder_backward(params, batch, trace, combined.grad_qs);

    // Central differences are meaningless where the +/-eps evaluations sit on
    // different sides of a ReLU kink, so samples whose activation gate
    // pattern flips are redrawn rather than compared.
    const double eps = 1e-3;
    const std::size_t total = encoder_param_count();
    Rng pick_rng(35);
    int accepted = 0;
    int rejected = 0;
    double max_rel = 0.0;
    while (accepted < 500 && accepted + rejected < 3000) {
        const auto idx = static_cast<std::size_t>(pick_rng.uniform_int(total));
        const double saved = params.data[idx];
        params.data[idx] = saved + eps;
        const LossProbe up = probe_loss(params, batch, key, queue, tau);
        params.data[idx] = saved - eps;
        const LossProbe down = probe_loss(params, batch, key, queue, tau);
        params.data[idx] = saved;
        if (up.gates != down.gates) {
            ++rejected;
            continue;
        }
        ++accepted;
        const double fd = (up.loss - down.loss) / (2.0 * eps);
        const double denom = std::max({std::abs(fd), std::abs(analytic.data[idx]), 1e-6});
        max_rel = std::max(max_rel, std::abs(fd - analytic.data[idx]) / denom);
    }
    const double elapsed = now_seconds() - t0;
    if (accepted < 500) {
        return format("only %d kink-free samples out of %d draws", accepted,
                      accepted + rejected);
    }
    if (max_rel >= 1e-4) {
        return format("max relative error %.3e over %d parameters, want < 1e-4", max_rel,
                      accepted);
    }
    if (elapsed >= 120.0) {
        return format("gradient check took %.1f s, want < 120 s", elapsed);
    }
    detail = format("%d sampled parameters (%d kink draws redrawn), max rel err %.1e, %.0f s",
                    accepted, rejected, max_rel, elapsed);
    return {};
}

// --- criterion 7: training sanity ---------------------------------------------

std::string check_training_sanity(std::string& detail) {
    const Manifest manifest = structured_corpus(g_scratch / "train_corpus", 64, 96, 42);

    // Desk-scale protocol: the 1920-step budget needs a key horizon that fits
    // inside it (m=0.99), a queue shorter than the corpus so an image's own
    // stale key cannot sit among its negatives, and plain SGD, because the
    // heavy-ball integrator amplifies the common-mode gradient component
    // until every embedding collapses into one direction.
    TrainConfig config;
    config.batch_size = 1;
    config.queue_capacity = 16;
    config.lr = 0.03;
    config.epochs = 30;
    config.seed = 0;
    config.momentum_m = 0.99;
    config.sgd_momentum = 0.0;
    config.weight_decay = 1e-4;
    config.temperature = 0.2;

    const TrainResult result = train(config, manifest);
    const double first = result.loss_history.front();
    const double final_loss = result.loss_history.back();

    // Margin in the training geometry: keys are augmented full views under
    // the momentum encoder, queries are crop-and-mix canvases under the
    // query encoder, negatives are the other images' keys from the same
    // parameters (no credit for temporal drift against a stale queue).
    std::vector<Image> images;
    for (const auto& entry : manifest.entries) {
        images.push_back(load_image(entry.path));
    }
    Rng rng(Rng(config.seed).derive(0xAB));
    std::vector<Embedding> keys;
    for (std::size_t i = 0; i < images.size(); ++i) {
        Rng key_rng = rng.derive(2 * i + 1);
        const Image view = apply_transform(images[i], draw_transform(key_rng));
        keys.push_back(encoder_forward(result.state.key, batch_from_images({view})).front());
    }
    double pos = 0.0;
    double neg = 0.0;
    std::size_t npos = 0;
    std::size_t nneg = 0;
    for (std::size_t i = 0; i < images.size(); ++i) {
        Rng query_rng = rng.derive(2 * i);
        const auto samples = rcm_positives(images[i], config.rcm_c, query_rng);
        std::vector<Image> canvases;
        for (const auto& sample : samples) {
            canvases.push_back(sample.canvas);
        }
        const auto queries = encoder_forward(result.params, batch_from_images(canvases));
        for (const auto& q : queries) {
            pos += cosine(q, keys[i]);
            ++npos;
            for (std::size_t j = 0; j < keys.size(); ++j) {
                if (j != i) {
                    neg += cosine(q, keys[j]);
                    ++nneg;
                }
            }
        }
    }
    pos /= static_cast<double>(npos);
    neg /= static_cast<double>(nneg);

    if (final_loss >= first) {
        return format("final-epoch loss %.4f did not improve on first-epoch %.4f", final_loss,
                      first);
    }
    if (pos - neg < 0.1) {
        return format("positive/negative similarity margin %.4f (pos %.4f, neg %.4f), want >= 0.1",
                      pos - neg, pos, neg);
    }
    detail = format("loss %.3f -> %.3f over 30 epochs; pos %.3f vs neg %.3f, margin %.2f",
                    first, final_loss, pos, neg, pos - neg);
    return {};
}

// --- criterion 8: correlation oracles -----------------------------------------

double pearson_reference(const std::vector<double>& x, const std::vector<double>& y) {
    const auto n = static_cast<double>(x.size());
    double mx = 0.0;
    double my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i] / n;
        my += y[i] / n;
    }
    double sxy = 0.0;
    double sxx = 0.0;
    double syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
        syy += (y[i] - my) * (y[i] - my);
    }
    return sxy / std::sqrt(sxx * syy);
}

std::vector<double> ranks_reference(const std::vector<double>& values) {
    // O(n^2) mid-rank: 1 + (count below) + (ties - 1) / 2.
    std::vector<double> ranks(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
        int below = 0;
        int tied = 0;
        for (const double v : values) {
            below += v < values[i] ? 1 : 0;
            tied += v == values[i] ? 1 : 0;
        }
        ranks[i] = 1.0 + below + (tied - 1) / 2.0;
    }
    return ranks;
}

std::string check_metric_oracles(std::string& detail) {
    const std::vector<double> hx{1.0, 2.0, 3.0};
    const std::vector<double> hy{1.0, 3.0, 2.0};
    if (pearson(hx, hy) != 0.5) {
        return format("hand case pearson({1,2,3},{1,3,2}) = %.17f, want exactly 0.5",
                      pearson(hx, hy));
    }
    if (spearman(hx, hy) != 0.5) {
        return format("hand case spearman = %.17f, want exactly 0.5", spearman(hx, hy));
    }

    Rng rng(41);
    double worst = 0.0;
    for (int trial = 0; trial < 1000; ++trial) {
        const auto n = 3 + static_cast<std::size_t>(rng.uniform_int(38));
        const bool gridded = rng.bernoulli(0.5);
        std::vector<double> x(n);
        std::vector<double> y(n);
        for (std::size_t i = 0; i < n; ++i) {
            // Integer grids force ties in half the trials.
            x[i] = gridded ? std::floor(rng.uniform(0.0, 6.0)) : rng.gaussian();
            y[i] = gridded ? std::floor(rng.uniform(0.0, 6.0)) : rng.gaussian();
        }
        x[0] += 1.0;  // guarantee both vectors vary
        y[n - 1] += 1.0;
        worst = std::max(worst, std::abs(pearson(x, y) - pearson_reference(x, y)));
        const double srcc_ref = pearson_reference(ranks_reference(x), ranks_reference(y));
        worst = std::max(worst, std::abs(spearman(x, y) - srcc_ref));
        if (worst >= 1e-12) {
            return format("trial %d (n=%zu%s): deviation %.3e from brute-force reference",
                          trial, n, gridded ? ", ties" : "", worst);
        }
    }
    detail = format("1000 random vectors incl. ties, max |delta| %.1e; r=0.5 case exact",
                    worst);
    return {};
}

// --- criterion 9: few-shot sample-size trend -----------------------------------

std::string check_few_shot_trend(std::string& detail) {
    const Manifest manifest = synth_corpus(500, 64, 99, g_scratch / "fewshot_pool");
    Rng enc_rng(7);
    const EncoderParams encoder = EncoderParams::centered_init(enc_rng);

    std::vector<Embedding> embeddings;
    std::vector<double> labels;
    std::vector<Image> chunk;
    for (const auto& entry : manifest.entries) {
        chunk.push_back(load_image(entry.path));
        labels.push_back(*entry.score);
        if (chunk.size() == 25) {
            for (const auto& e : encoder_forward(encoder, batch_from_images(chunk))) {
                embeddings.push_back(e);
            }
            chunk.clear();
        }
    }

    double mean10 = 0.0;
    double mean200 = 0.0;
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        FinetuneConfig config;
        config.seed = seed;
        const auto rows = few_shot_curve_embeddings(embeddings, labels, {10, 200}, config);
        mean10 += rows[0].pcc / 5.0;
        mean200 += rows[1].pcc / 5.0;
    }
    if (mean200 < mean10) {
        return format("mean PCC fell from %.4f at n=10 to %.4f at n=200 over 5 seeds", mean10,
                      mean200);
    }
    detail = format("entropy labels, 5 seeds: mean PCC %.3f at n=10 -> %.3f at n=200", mean10,
                    mean200);
    return {};
}

// --- criterion 10: normal-fit recovery ------------------------------------------

std::string check_icd_recovery(std::string& detail) {
    Rng rng(123);
    std::vector<double> draws(10000);
    for (auto& v : draws) {
        v = 0.5 + 0.1 * rng.gaussian();
    }
    const NormalFit fit = fit_normal(draws);
    if (std::abs(fit.mu - 0.5) > 0.01) {
        return format("mu %.4f, want 0.5 +/- 0.01", fit.mu);
    }
    if (std::abs(fit.sigma - 0.1) > 0.01) {
        return format("sigma %.4f, want 0.1 +/- 0.01", fit.sigma);
    }
    if (fit.ks >= 0.02) {
        return format("KS distance %.4f, want < 0.02", fit.ks);
    }
    detail = format("10k draws: mu %.4f, sigma %.4f, KS %.4f", fit.mu, fit.sigma, fit.ks);
    return {};
}

// --- criterion 11: stratification partition -------------------------------------

std::string check_stratification(std::string& detail) {
    const Manifest manifest = synth_corpus(60, 48, 17, g_scratch / "strata_corpus");
    const ScoredManifest scored = score_dataset(manifest, "entropy");
    if (!scored.failures.empty()) {
        return format("%zu scoring failures on a clean corpus", scored.failures.size());
    }
    const Strata strata = stratify(scored, 0.3, 0.7);

    std::map<std::string, double> score_by_id;
    for (const auto& entry : scored.entries) {
        score_by_id[entry.id] = entry.score;
    }
    std::set<std::string> seen;
    const auto check_stratum = [&](const Manifest& stratum,
                                   const std::function<bool(double)>& belongs,
                                   const char* name) -> std::string {
        for (const auto& entry : stratum.entries) {
            const auto it = score_by_id.find(entry.effective_id());
            if (it == score_by_id.end()) {
                return format("%s stratum holds unknown id %s", name,
                              entry.effective_id().c_str());
            }
            if (!seen.insert(entry.effective_id()).second) {
                return format("id %s appears in two strata", entry.effective_id().c_str());
            }
            if (!belongs(it->second)) {
                return format("%s stratum holds score %.4f, outside its range", name,
                              it->second);
            }
        }
        return {};
    };
    std::string err = check_stratum(strata.low, [](double s) { return s < 0.3; }, "low");
    if (err.empty()) {
        err = check_stratum(strata.high, [](double s) { return s > 0.7; }, "high");
    }
    if (err.empty()) {
        err = check_stratum(strata.mid, [](double s) { return s >= 0.3 && s <= 0.7; }, "mid");
    }
    if (!err.empty()) {
        return err;
    }
    if (seen.size() != scored.entries.size()) {
        return format("strata cover %zu of %zu scored entries", seen.size(),
                      scored.entries.size());
    }
    if (strata.low.entries.empty() || strata.mid.entries.empty() ||
        strata.high.entries.empty()) {
        return "a stratum came out empty on the synthetic corpus";
    }
    detail = format("60 scored images -> %zu low / %zu mid / %zu high, disjoint and exhaustive",
                    strata.low.entries.size(), strata.mid.entries.size(),
                    strata.high.entries.size());
    return {};
}

// --- criterion 12: fusion identity, constants, linearity -------------------------

FeatureMap random_map(int channels, int height, int width, Rng& rng) {
    FeatureMap map;
    map.channels = channels;
    map.height = height;
    map.width = width;
    map.data.resize(static_cast<std::size_t>(channels) * height * width);
    for (auto& v : map.data) {
        v = rng.gaussian();
    }
    return map;
}

std::string check_fusion(std::string& detail) {
    Rng rng(53);
    const FeatureMap task = random_map(3, 9, 7, rng);
    const FeatureMap ic = random_map(5, 4, 4, rng);

    const FeatureMap identity = fuse(task, ic, 0.0);
    if (identity.data != task.data) {
        return "weight=0 fusion altered the task map";
    }

    FeatureMap zeros = random_map(4, 6, 6, rng);
    std::fill(zeros.data.begin(), zeros.data.end(), 0.0);
    FeatureMap ones = random_map(4, 6, 6, rng);
    std::fill(ones.data.begin(), ones.data.end(), 1.0);
    const FeatureMap half = fuse(zeros, ones, 0.5);
    for (const double v : half.data) {
        if (v != 0.5) {
            return format("constant case produced %.17f, want exactly 0.5", v);
        }
    }

    const FeatureMap once = fuse(task, ic, 0.3);
    const FeatureMap twice = fuse(task, ic, 0.6);
    double worst = 0.0;
    for (std::size_t i = 0; i < task.data.size(); ++i) {
        const double d1 = once.data[i] - task.data[i];
        const double d2 = twice.data[i] - task.data[i];
        worst = std::max(worst, std::abs(d2 - 2.0 * d1));
    }
    if (worst >= 1e-6) {
        return format("linearity deviation %.3e between w=0.3 and w=0.6, want < 1e-6", worst);
    }
    detail = format("identity exact, constants propagate to 0.5, linearity within %.1e", worst);
    return {};
}

// --- criterion 13: CLI determinism ------------------------------------------------

int run_step(const fs::path& dir, const std::string& args, int index) {
    std::ostringstream cmd;
    cmd << "cd " << dir << " && " << g_cli << " " << args << " > step_" << index
        << ".out 2> step_" << index << ".err";
    const int rc = std::system(cmd.str().c_str());
    return rc;
}

std::string run_pipeline(const fs::path& dir) {
    fs::create_directories(dir);

    // fuse-demo consumes feature-map blobs; write identical inputs up front.
    Rng rng(67);
    write_feature_map(random_map(3, 8, 8, rng), dir / "task.fmap");
    write_feature_map(random_map(2, 4, 4, rng), dir / "ic.fmap");

    const std::vector<std::string> steps{
        "synth --count 8 --side 32 --seed 5 --out-dir corpus --manifest corpus/manifest.jsonl",
        "score --manifest corpus/manifest.jsonl --scorer entropy --out scored.jsonl "
        "--report score_report.json",
        "expand --manifest corpus/manifest.jsonl --c 2 --seed 3 --out-dir expanded "
        "--out expanded.jsonl --report expand_report.json",
        "train --manifest corpus/manifest.jsonl --out-dir run --epochs 2 --batch-size 4 "
        "--queue-capacity 8 --seed 1",
        "finetune --manifest scored.jsonl --encoder run/encoder.clic --out head.clic "
        "--report finetune_report.json --epochs 5 --batch-size 4 --seed 2",
        "eval --manifest scored.jsonl --encoder run/encoder.clic --head head.clic "
        "--out eval.json",
        "icd --manifest corpus/manifest.jsonl --scorer entropy --bins 10 --out icd.json "
        "--hist-csv hist.csv --svg hist.svg",
        "stratify --scored scored.jsonl --lo 0.3 --hi 0.7 --out-dir strata",
        "fewshot --manifest scored.jsonl --encoder run/encoder.clic --ns 4 --out fewshot.csv "
        "--report fewshot_report.json --epochs 5 --seed 3",
        "fuse-demo --task task.fmap --ic ic.fmap --weight 0.5 --out fused.fmap",
    };
    for (std::size_t i = 0; i < steps.size(); ++i) {
        const int rc = run_step(dir, steps[i], static_cast<int>(i));
        if (rc != 0) {
            return format("step %zu (%s...) exited with %d", i,
                          steps[i].substr(0, steps[i].find(' ')).c_str(), rc);
        }
    }
    return {};
}

std::map<std::string, std::string> read_tree(const fs::path& root) {
    std::map<std::string, std::string> tree;
    for (const auto& entry : fs::recursive_directory_iterator(root)) {
        if (!entry.is_regular_file()) {
            continue;
        }
        std::ifstream in(entry.path(), std::ios::binary);
        std::ostringstream body;
        body << in.rdbuf();
        tree[fs::relative(entry.path(), root).generic_string()] = body.str();
    }
    return tree;
}

std::string check_cli_determinism(std::string& detail) {
    const fs::path run_a = g_scratch / "cli_run_a";
    const fs::path run_b = g_scratch / "cli_run_b";
    for (const auto& dir : {run_a, run_b}) {
        const std::string err = run_pipeline(dir);
        if (!err.empty()) {
            return err;
        }
    }

    const auto tree_a = read_tree(run_a);
    const auto tree_b = read_tree(run_b);
    if (tree_a.size() != tree_b.size()) {
        return format("runs produced %zu vs %zu files", tree_a.size(), tree_b.size());
    }
    std::size_t bytes = 0;
    for (const auto& [rel, body] : tree_a) {
        const auto it = tree_b.find(rel);
        if (it == tree_b.end()) {
            return format("file %s exists in only one run", rel.c_str());
        }
        if (it->second != body) {
            return format("file %s differs between runs", rel.c_str());
        }
        bytes += body.size();
    }
    detail = format("all 10 subcommands, %zu files / %zu bytes byte-identical across two runs",
                    tree_a.size(), bytes);
    return {};
}

struct Criterion {
    const char* name;
    std::string (*body)(std::string&);
};

}  // namespace

int main(int argc, char** argv) {
    if (argc > 1) {
        g_cli = argv[1];
    } else if (const char* env = std::getenv("CLIC_BIN")) {
        g_cli = env;
    }
    if (g_cli.empty()) {
        std::fprintf(stderr, "usage: acceptance <path-to-clic-cli>\n");
        return 2;
    }
    g_cli = fs::absolute(g_cli).string();

    g_scratch = fs::temp_directory_path() / "clic_acceptance";
    std::error_code ec;
    fs::remove_all(g_scratch, ec);
    fs::create_directories(g_scratch);

    const Criterion criteria[] = {
        {"rcm-crop-counts", check_rcm_counts},
        {"rcm-expansion-factors", check_expansion_factors},
        {"momentum-update", check_momentum_update},
        {"queue-fifo", check_queue_fifo},
        {"infonce-values", check_infonce_values},
        {"gradient-check", check_gradients},
        {"training-sanity", check_training_sanity},
        {"metric-oracles", check_metric_oracles},
        {"few-shot-trend", check_few_shot_trend},
        {"icd-recovery", check_icd_recovery},
        {"stratification", check_stratification},
        {"fusion", check_fusion},
        {"cli-determinism", check_cli_determinism},
    };

    int failures = 0;
    int index = 0;
    for (const auto& criterion : criteria) {
        ++index;
        std::string detail;
        std::string error;
        try {
            error = criterion.body(detail);
        } catch (const std::exception& e) {
            error = format("unexpected exception: %s", e.what());
        }
        if (error.empty()) {
            std::printf("PASS %2d/13 %-24s %s\n", index, criterion.name, detail.c_str());
        } else {
            std::printf("FAIL %2d/13 %-24s %s\n", index, criterion.name, error.c_str());
            ++failures;
        }
        std::fflush(stdout);
    }
    std::printf("%d/13 acceptance criteria passed\n", 13 - failures);
    fs::remove_all(g_scratch, ec);
    return failures == 0 ? 0 : 1;
}
