#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "clic/encoder.hpp"
#include "clic/heuristics.hpp"
#include "clic/image.hpp"

namespace clic {

/// Linear probe on top of the frozen encoder: one logit, squashed by
/// sigmoid into a complexity score.
struct RegressionHead {
    std::array<double, kEmbedDim> weights{};
    double bias = 0.0;
};

struct FinetuneConfig {
    int batch_size = 128;
    double lr = 0.001;  // fixed, no schedule
    double momentum = 0.9;
    double weight_decay = 0.001;
    int epochs = 30;
    std::uint64_t seed = 0;
};

/// One supervised example for head training or evaluation.
struct LabeledImage {
    Image image;
    ICScore label;
    std::string id;
};

double head_logit(const RegressionHead& head, const Embedding& embedding);

/// sigmoid(head(embedding(img))), always in (0, 1).
ICScore predict_ic(const EncoderParams& encoder, const RegressionHead& head, const Image& img);

/// Trains the head on mean squared error with SGD per config. The encoder
/// is read-only: embeddings are computed once up front and the returned
/// head is the only trained state. Throws EmptyDataset.
RegressionHead finetune(const EncoderParams& encoder, const std::vector<LabeledImage>& labeled,
                        const FinetuneConfig& config);

/// Embedding-space variant used wherever the encoder output is already
/// cached (few-shot sweeps, repeated evaluation).
RegressionHead finetune_embeddings(const std::vector<Embedding>& embeddings,
                                   const std::vector<double>& labels,
                                   const FinetuneConfig& config);

struct EvalRow {
    std::string id;
    double prediction = 0.0;
    double label = 0.0;
};

struct EvalReport {
    double pcc = 0.0;
    double srcc = 0.0;
    int n = 0;
    std::string scorer;
    std::vector<EvalRow> rows;
};

/// Scores every example with the head and correlates predictions against
/// labels. Throws InsufficientData below two examples.
EvalReport evaluate(const EncoderParams& encoder, const RegressionHead& head,
                    const std::vector<LabeledImage>& labeled);

struct FewShotRow {
    int n = 0;
    double pcc = 0.0;
    double srcc = 0.0;
};

/// For each n in ns (ascending): draw n training examples from the pool,
/// fine-tune a fresh head, evaluate on a fixed held-out fifth of the pool.
/// Sampling, batching, and the split all derive from config.seed. Throws
/// InsufficientData when the pool cannot cover max(ns) plus the split.
std::vector<FewShotRow> few_shot_curve(const EncoderParams& encoder,
                                       const std::vector<LabeledImage>& pool,
                                       const std::vector<int>& ns, const FinetuneConfig& config);

/// Embedding-space variant: same protocol against precomputed embeddings.
std::vector<FewShotRow> few_shot_curve_embeddings(const std::vector<Embedding>& embeddings,
                                                  const std::vector<double>& labels,
                                                  const std::vector<int>& ns,
                                                  const FinetuneConfig& config);

/// Head checkpoint: blob sections "head.weight" [1,128] and "head.bias" [1].
void save_head(const RegressionHead& head, const std::filesystem::path& path);
RegressionHead load_head(const std::filesystem::path& path);

}  // namespace clic
