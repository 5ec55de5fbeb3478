#include "clic/finetune.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "clic/checkpoint.hpp"
#include "clic/error.hpp"
#include "clic/metrics.hpp"
#include "clic/rng.hpp"

namespace clic {

namespace {

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

std::vector<Embedding> embed_all(const EncoderParams& encoder,
                                 const std::vector<LabeledImage>& labeled) {
    std::vector<Embedding> embeddings;
    embeddings.reserve(labeled.size());
    std::vector<Image> one(1);
    for (const auto& example : labeled) {
        one[0] = example.image;
        embeddings.push_back(encoder_forward(encoder, batch_from_images(one)).front());
    }
    return embeddings;
}

}  // namespace

double head_logit(const RegressionHead& head, const Embedding& embedding) {
    double z = head.bias;
    for (int d = 0; d < kEmbedDim; ++d) {
        z += head.weights[static_cast<std::size_t>(d)] * embedding[static_cast<std::size_t>(d)];
    }
    return z;
}

ICScore predict_ic(const EncoderParams& encoder, const RegressionHead& head, const Image& img) {
    const auto embedding =
        encoder_forward(encoder, batch_from_images({img})).front();
    return ICScore{sigmoid(head_logit(head, embedding))};
}

RegressionHead finetune_embeddings(const std::vector<Embedding>& embeddings,
                                   const std::vector<double>& labels,
                                   const FinetuneConfig& config) {
    if (embeddings.empty()) {
        throw EmptyDataset("finetune needs at least one labeled example");
    }
    if (embeddings.size() != labels.size()) {
        throw ShapeMismatch("embedding/label count mismatch");
    }
    const std::size_t n = embeddings.size();
    const std::size_t batch = std::min<std::size_t>(
        static_cast<std::size_t>(std::max(1, config.batch_size)), n);

    RegressionHead head;
    std::array<double, kEmbedDim> velocity_w{};
    double velocity_b = 0.0;

    Rng root(config.seed);
    std::vector<std::size_t> order(n);
    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        Rng epoch_rng = root.derive(static_cast<std::uint64_t>(epoch));
        std::iota(order.begin(), order.end(), std::size_t{0});
        for (std::size_t i = n; i > 1; --i) {
            std::swap(order[i - 1], order[epoch_rng.uniform_int(i)]);
        }

        for (std::size_t start = 0; start < n; start += batch) {
            const std::size_t end = std::min(n, start + batch);
            const double inv = 1.0 / static_cast<double>(end - start);

            std::array<double, kEmbedDim> grad_w{};
            double grad_b = 0.0;
            for (std::size_t i = start; i < end; ++i) {
                const auto& e = embeddings[order[i]];
                const double p = sigmoid(head_logit(head, e));
                // d/dz of (p - y)^2 with p = sigmoid(z)
                const double gz = 2.0 * (p - labels[order[i]]) * p * (1.0 - p) * inv;
                for (int d = 0; d < kEmbedDim; ++d) {
                    grad_w[static_cast<std::size_t>(d)] += gz * e[static_cast<std::size_t>(d)];
                }
                grad_b += gz;
            }

            for (int d = 0; d < kEmbedDim; ++d) {
                auto& v = velocity_w[static_cast<std::size_t>(d)];
                auto& w = head.weights[static_cast<std::size_t>(d)];
                v = config.momentum * v + grad_w[static_cast<std::size_t>(d)] +
                    config.weight_decay * w;
                w -= config.lr * v;
            }
            velocity_b = config.momentum * velocity_b + grad_b + config.weight_decay * head.bias;
            head.bias -= config.lr * velocity_b;
        }
    }
    return head;
}

RegressionHead finetune(const EncoderParams& encoder, const std::vector<LabeledImage>& labeled,
                        const FinetuneConfig& config) {
    if (labeled.empty()) {
        throw EmptyDataset("finetune needs at least one labeled example");
    }
    const auto embeddings = embed_all(encoder, labeled);
    std::vector<double> labels;
    labels.reserve(labeled.size());
    for (const auto& example : labeled) {
        labels.push_back(example.label.value);
    }
    return finetune_embeddings(embeddings, labels, config);
}

EvalReport evaluate(const EncoderParams& encoder, const RegressionHead& head,
                    const std::vector<LabeledImage>& labeled) {
    if (labeled.size() < 2) {
        throw InsufficientData("evaluation needs at least two labeled examples");
    }
    EvalReport report;
    report.scorer = "clic";
    report.n = static_cast<int>(labeled.size());

    const auto embeddings = embed_all(encoder, labeled);
    std::vector<double> predictions(labeled.size());
    std::vector<double> labels(labeled.size());
    report.rows.reserve(labeled.size());
    for (std::size_t i = 0; i < labeled.size(); ++i) {
        predictions[i] = sigmoid(head_logit(head, embeddings[i]));
        labels[i] = labeled[i].label.value;
        report.rows.push_back({labeled[i].id, predictions[i], labels[i]});
    }
    report.pcc = pearson(predictions, labels);
    report.srcc = spearman(predictions, labels);
    return report;
}

std::vector<FewShotRow> few_shot_curve_embeddings(const std::vector<Embedding>& embeddings,
                                                  const std::vector<double>& labels,
                                                  const std::vector<int>& ns,
                                                  const FinetuneConfig& config) {
    if (ns.empty()) {
        throw UsageError("few-shot sweep needs at least one sample count");
    }
    for (std::size_t i = 0; i + 1 < ns.size(); ++i) {
        if (ns[i] >= ns[i + 1]) {
            throw UsageError("few-shot sample counts must be strictly ascending");
        }
    }
    if (ns.front() < 1) {
        throw UsageError("few-shot sample counts must be positive");
    }
    const std::size_t pool = embeddings.size();
    const std::size_t eval_count = std::max<std::size_t>(2, pool / 5);
    if (pool < eval_count + static_cast<std::size_t>(ns.back())) {
        throw InsufficientData("pool of " + std::to_string(pool) +
                               " cannot cover max n " + std::to_string(ns.back()) +
                               " plus a held-out split of " + std::to_string(eval_count));
    }

    Rng root(config.seed);
    Rng split_rng = root.derive(0xE7A1);
    std::vector<std::size_t> order(pool);
    std::iota(order.begin(), order.end(), std::size_t{0});
    for (std::size_t i = pool; i > 1; --i) {
        std::swap(order[i - 1], order[split_rng.uniform_int(i)]);
    }

    std::vector<double> eval_labels;
    std::vector<Embedding> eval_embeddings;
    for (std::size_t i = 0; i < eval_count; ++i) {
        eval_embeddings.push_back(embeddings[order[i]]);
        eval_labels.push_back(labels[order[i]]);
    }
    const std::vector<std::size_t> train_pool(order.begin() + static_cast<std::ptrdiff_t>(eval_count),
                                              order.end());

    std::vector<FewShotRow> rows;
    rows.reserve(ns.size());
    for (std::size_t run = 0; run < ns.size(); ++run) {
        const auto n = static_cast<std::size_t>(ns[run]);
        Rng sample_rng = root.derive(0xA100 + run);
        std::vector<std::size_t> picks(train_pool);
        for (std::size_t i = picks.size(); i > 1; --i) {
            std::swap(picks[i - 1], picks[sample_rng.uniform_int(i)]);
        }
        picks.resize(n);

        std::vector<Embedding> train_embeddings;
        std::vector<double> train_labels;
        train_embeddings.reserve(n);
        train_labels.reserve(n);
        for (std::size_t idx : picks) {
            train_embeddings.push_back(embeddings[idx]);
            train_labels.push_back(labels[idx]);
        }

        FinetuneConfig run_config = config;
        run_config.seed = root.derive(0xB200 + run).next_u64();
        const RegressionHead head =
            finetune_embeddings(train_embeddings, train_labels, run_config);

        std::vector<double> predictions(eval_count);
        for (std::size_t i = 0; i < eval_count; ++i) {
            predictions[i] = sigmoid(head_logit(head, eval_embeddings[i]));
        }
        rows.push_back({ns[run], pearson(predictions, eval_labels),
                        spearman(predictions, eval_labels)});
    }
    return rows;
}

std::vector<FewShotRow> few_shot_curve(const EncoderParams& encoder,
                                       const std::vector<LabeledImage>& pool,
                                       const std::vector<int>& ns,
                                       const FinetuneConfig& config) {
    const auto embeddings = embed_all(encoder, pool);
    std::vector<double> labels;
    labels.reserve(pool.size());
    for (const auto& example : pool) {
        labels.push_back(example.label.value);
    }
    return few_shot_curve_embeddings(embeddings, labels, ns, config);
}

void save_head(const RegressionHead& head, const std::filesystem::path& path) {
    BlobSection weight;
    weight.name = "head.weight";
    weight.shape = {1, kEmbedDim};
    weight.data.assign(head.weights.begin(), head.weights.end());
    BlobSection bias;
    bias.name = "head.bias";
    bias.shape = {1};
    bias.data = {static_cast<float>(head.bias)};
    write_blob(path, {weight, bias});
}

RegressionHead load_head(const std::filesystem::path& path) {
    const auto sections = read_blob(path);
    RegressionHead head;
    bool have_weight = false, have_bias = false;
    for (const auto& section : sections) {
        if (section.name == "head.weight") {
            if (section.data.size() != static_cast<std::size_t>(kEmbedDim)) {
                throw ShapeMismatch("head.weight must hold " + std::to_string(kEmbedDim) +
                                    " values");
            }
            std::copy(section.data.begin(), section.data.end(), head.weights.begin());
            have_weight = true;
        } else if (section.name == "head.bias") {
            if (section.data.size() != 1) {
                throw ShapeMismatch("head.bias must hold one value");
            }
            head.bias = section.data.front();
            have_bias = true;
        }
    }
    if (!have_weight || !have_bias) {
        throw ShapeMismatch(path.string() + " is not a head checkpoint");
    }
    return head;
}

}  // namespace clic
