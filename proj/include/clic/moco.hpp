#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "clic/encoder.hpp"
#include "clic/manifest.hpp"
#include "clic/rng.hpp"

namespace clic {

/// Fixed-capacity FIFO dictionary of past key embeddings. The write pointer
/// wraps, so the oldest keys are always the ones overwritten.
class NegativeQueue {
public:
    NegativeQueue() = default;
    explicit NegativeQueue(int capacity) : keys_(static_cast<std::size_t>(capacity)) {}

    /// MoCo-style warm start: capacity random unit vectors.
    static NegativeQueue random_init(int capacity, Rng& rng);

    int capacity() const { return static_cast<int>(keys_.size()); }
    int ptr() const { return ptr_; }
    const std::vector<Embedding>& keys() const { return keys_; }

    /// Writes the batch at ptr..ptr+B (mod capacity) and advances ptr.
    /// The batch size must divide the capacity.
    void enqueue(std::span<const Embedding> batch);

private:
    std::vector<Embedding> keys_;
    int ptr_ = 0;
};

/// Contrastive-training hyperparameters. Defaults are desk scale; the
/// full-scale settings (200 epochs, batch 128) remain reachable through the
/// same fields.
struct TrainConfig {
    int batch_size = 128;
    double lr = 0.03;
    int epochs = 30;
    std::array<double, 2> lr_drop_points{0.6, 0.8};  // fractions of total epochs, x0.1 each
    double momentum_m = 0.999;
    double temperature = 0.2;
    int queue_capacity = 4096;
    int rcm_c = 2;
    std::uint64_t seed = 0;
    double sgd_momentum = 0.9;
    double weight_decay = 1e-4;
};

/// Everything the trainer mutates. The key encoder changes only through
/// momentum_update; the optimizer touches the query side alone.
struct TrainState {
    EncoderParams query;
    EncoderParams key;
    NegativeQueue queue;
    EncoderParams velocity;
    int epoch = 0;
    std::vector<double> loss_history;
};

/// Exponential moving average: every key parameter becomes
/// m * key + (1 - m) * query, exactly.
void momentum_update(EncoderParams& key_params, const EncoderParams& query_params, double m);

struct InfoNceResult {
    double loss = 0.0;
    Embedding grad_q{};
};

/// Softmax cross-entropy with temperature: the positive key competes against
/// every queued negative. Gradients flow to the query only; keys and queue
/// contents are treated as constants.
InfoNceResult info_nce(const Embedding& q, const Embedding& k_pos, const NegativeQueue& queue,
                       double tau);

struct MultiPositiveResult {
    double loss = 0.0;
    std::vector<Embedding> grad_qs;
};

/// Arithmetic mean of info_nce over all positive queries of one instance.
MultiPositiveResult multi_positive_loss(const std::vector<Embedding>& qs,
                                        const Embedding& k_pos, const NegativeQueue& queue,
                                        double tau);

/// Fresh state: centered-init query encoder, key encoder copied from it,
/// random-unit-vector queue, zero velocity.
TrainState init_train_state(const TrainConfig& config);

/// One optimization step over a batch of source images. Per image: crop-and-
/// mix positives feed the query encoder, one independently augmented
/// full-image view feeds the key encoder, the combined loss backpropagates
/// into the query side only; then SGD, momentum update, and key enqueue.
/// Returns the mean loss over the batch.
double train_step(TrainState& state, const std::vector<Image>& batch,
                  const TrainConfig& config, double lr, const Rng& step_rng);

/// Base lr scaled by 0.1 for every drop point at or below this (0-based)
/// epoch; drop points are ceil(fraction * epochs).
double learning_rate_for_epoch(const TrainConfig& config, int epoch);

struct TrainResult {
    EncoderParams params;  // final query encoder
    std::vector<double> loss_history;
    TrainState state;
};

/// Full training loop with the step-decay schedule. When out_dir is
/// nonempty, every epoch writes `encoder.clic` (float32 checkpoint),
/// `state.bin` (full-precision trainer state), and `train.json`; with
/// resume=true an existing state.bin continues where it stopped.
TrainResult train(const TrainConfig& config, const Manifest& manifest,
                  const std::filesystem::path& out_dir = {}, bool resume = false);

/// Config echo used by reports and the train sidecar (JSON object text).
std::string train_config_json(const TrainConfig& config);

void save_train_state(const TrainState& state, const std::filesystem::path& path);
TrainState load_train_state(const std::filesystem::path& path);

}  // namespace clic
