#include "clic/moco.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>

#include <json.hpp>

#include "clic/checkpoint.hpp"
#include "clic/error.hpp"
#include "clic/image_io.hpp"
#include "clic/rcm.hpp"

namespace clic {

NegativeQueue NegativeQueue::random_init(int capacity, Rng& rng) {
    NegativeQueue queue(capacity);
    for (auto& key : queue.keys_) {
        double norm_sq = 0.0;
        for (auto& v : key) {
            v = rng.gaussian();
            norm_sq += v * v;
        }
        const double inv = 1.0 / std::sqrt(norm_sq);
        for (auto& v : key) {
            v *= inv;
        }
    }
    return queue;
}

void NegativeQueue::enqueue(std::span<const Embedding> batch) {
    const int b = static_cast<int>(batch.size());
    if (b == 0 || capacity() == 0 || capacity() % b != 0) {
        throw BatchSizeMismatch("batch size " + std::to_string(b) +
                                " must divide queue capacity " + std::to_string(capacity()));
    }
    for (const auto& key : batch) {
        keys_[static_cast<std::size_t>(ptr_)] = key;
        ptr_ = (ptr_ + 1) % capacity();
    }
}

void momentum_update(EncoderParams& key_params, const EncoderParams& query_params, double m) {
    if (key_params.data.size() != query_params.data.size()) {
        throw ShapeMismatch("key/query parameter buffers disagree in size");
    }
    for (std::size_t i = 0; i < key_params.data.size(); ++i) {
        key_params.data[i] = m * key_params.data[i] + (1.0 - m) * query_params.data[i];
    }
}

InfoNceResult info_nce(const Embedding& q, const Embedding& k_pos, const NegativeQueue& queue,
                       double tau) {
    const auto& negatives = queue.keys();
    if (negatives.empty()) {
        throw EmptyQueue("info_nce needs a nonempty negative queue");
    }
    auto dot = [](const Embedding& a, const Embedding& b) {
        double acc = 0.0;
        for (int i = 0; i < kEmbedDim; ++i) {
            acc += a[static_cast<std::size_t>(i)] * b[static_cast<std::size_t>(i)];
        }
        return acc;
    };

    const double l_pos = dot(q, k_pos) / tau;
    std::vector<double> l_neg(negatives.size());
    double max_logit = l_pos;
    for (std::size_t i = 0; i < negatives.size(); ++i) {
        l_neg[i] = dot(q, negatives[i]) / tau;
        max_logit = std::max(max_logit, l_neg[i]);
    }

    double sum_exp = std::exp(l_pos - max_logit);
    for (double l : l_neg) {
        sum_exp += std::exp(l - max_logit);
    }
    const double lse = max_logit + std::log(sum_exp);

    InfoNceResult result;
    result.loss = lse - l_pos;

    const double p_pos = std::exp(l_pos - lse);
    for (int d = 0; d < kEmbedDim; ++d) {
        result.grad_q[static_cast<std::size_t>(d)] =
            (p_pos - 1.0) * k_pos[static_cast<std::size_t>(d)] / tau;
    }
    for (std::size_t i = 0; i < negatives.size(); ++i) {
        const double p = std::exp(l_neg[i] - lse);
        for (int d = 0; d < kEmbedDim; ++d) {
            result.grad_q[static_cast<std::size_t>(d)] +=
                p * negatives[i][static_cast<std::size_t>(d)] / tau;
        }
    }
    return result;
}

MultiPositiveResult multi_positive_loss(const std::vector<Embedding>& qs,
                                        const Embedding& k_pos, const NegativeQueue& queue,
                                        double tau) {
    if (qs.empty()) {
        throw EmptyPositives("multi_positive_loss needs at least one positive query");
    }
    MultiPositiveResult result;
    result.grad_qs.resize(qs.size());
    const double inv_n = 1.0 / static_cast<double>(qs.size());
    for (std::size_t i = 0; i < qs.size(); ++i) {
        auto single = info_nce(qs[i], k_pos, queue, tau);
        result.loss += single.loss * inv_n;
        for (int d = 0; d < kEmbedDim; ++d) {
            result.grad_qs[i][static_cast<std::size_t>(d)] =
                single.grad_q[static_cast<std::size_t>(d)] * inv_n;
        }
    }
    return result;
}

TrainState init_train_state(const TrainConfig& config) {
    Rng root(config.seed);
    Rng param_rng = root.derive(0xC0DE);
    Rng queue_rng = root.derive(0xF1F0);
    TrainState state;
    state.query = EncoderParams::centered_init(param_rng);
    state.key = state.query;
    state.queue = NegativeQueue::random_init(config.queue_capacity, queue_rng);
    state.velocity = EncoderParams::zeros();
    return state;
}

double train_step(TrainState& state, const std::vector<Image>& batch,
                  const TrainConfig& config, double lr, const Rng& step_rng) {
    if (batch.empty()) {
        throw EmptyDataset("train_step on an empty batch");
    }
    const double inv_batch = 1.0 / static_cast<double>(batch.size());
    EncoderParams grads = EncoderParams::zeros();
    std::vector<Embedding> new_keys;
    new_keys.reserve(batch.size());
    double loss_acc = 0.0;

    for (std::size_t i = 0; i < batch.size(); ++i) {
        Rng query_rng = step_rng.derive(2 * i);
        Rng key_rng = step_rng.derive(2 * i + 1);

        const auto samples = rcm_positives(batch[i], config.rcm_c, query_rng);
        std::vector<Image> views;
        views.reserve(samples.size());
        for (const auto& sample : samples) {
            views.push_back(sample.canvas);
        }
        const Tensor query_batch = batch_from_images(views);

        // The key anchors the whole instance: one augmented full-image view.
        const Image key_view = apply_transform(batch[i], draw_transform(key_rng));
        const Tensor key_batch = batch_from_images({key_view});

        ForwardTrace trace;
        const auto query_embeddings = encoder_forward(state.query, query_batch, &trace);
        const auto key_embedding = encoder_forward(state.key, key_batch).front();

        auto combined =
            multi_positive_loss(query_embeddings, key_embedding, state.queue,
                                config.temperature);
        loss_acc += combined.loss * inv_batch;

        for (auto& g : combined.grad_qs) {
            for (auto& v : g) {
                v *= inv_batch;
            }
        }
        const EncoderParams sample_grads =
            encoder_backward(state.query, query_batch, trace, combined.grad_qs);
        for (std::size_t p = 0; p < grads.data.size(); ++p) {
            grads.data[p] += sample_grads.data[p];
        }
        new_keys.push_back(key_embedding);
    }

    sgd_step(state.query, grads, lr, config.sgd_momentum, config.weight_decay,
             state.velocity);
    momentum_update(state.key, state.query, config.momentum_m);
    state.queue.enqueue(new_keys);
    return loss_acc;
}

double learning_rate_for_epoch(const TrainConfig& config, int epoch) {
    double lr = config.lr;
    for (double fraction : config.lr_drop_points) {
        const int milestone =
            static_cast<int>(std::ceil(fraction * config.epochs - 1e-9));
        if (epoch >= milestone) {
            lr *= 0.1;
        }
    }
    return lr;
}

namespace {

nlohmann::ordered_json config_json_object(const TrainConfig& config) {
    nlohmann::ordered_json j;
    j["batch_size"] = config.batch_size;
    j["lr"] = config.lr;
    j["epochs"] = config.epochs;
    j["lr_drop_points"] = config.lr_drop_points;
    j["momentum_m"] = config.momentum_m;
    j["temperature"] = config.temperature;
    j["queue_capacity"] = config.queue_capacity;
    j["rcm_c"] = config.rcm_c;
    j["seed"] = config.seed;
    j["sgd_momentum"] = config.sgd_momentum;
    j["weight_decay"] = config.weight_decay;
    return j;
}

void write_sidecar(const TrainConfig& config, const TrainState& state,
                   const std::filesystem::path& path) {
    nlohmann::ordered_json j;
    j["epoch"] = state.epoch;
    j["config"] = config_json_object(config);
    j["loss_history"] = state.loss_history;
    std::ofstream out(path, std::ios::trunc);
    if (!out) {
        throw IoError("cannot write " + path.string());
    }
    out << j.dump(2) << "\n";
}

}  // namespace

std::string train_config_json(const TrainConfig& config) {
    return config_json_object(config).dump();
}

TrainResult train(const TrainConfig& config, const Manifest& manifest,
                  const std::filesystem::path& out_dir, bool resume) {
    if (manifest.empty()) {
        throw EmptyDataset("training manifest is empty");
    }
    std::vector<Image> images;
    images.reserve(manifest.size());
    for (const auto& entry : manifest.entries) {
        images.push_back(load_image(entry.path));
    }

    const int n = static_cast<int>(images.size());
    const int batch = std::min(config.batch_size, n);
    if (config.queue_capacity % batch != 0) {
        throw BatchSizeMismatch("queue capacity " + std::to_string(config.queue_capacity) +
                                " must be divisible by batch size " + std::to_string(batch));
    }

    TrainState state;
    const auto state_path = out_dir.empty() ? std::filesystem::path{} : out_dir / "state.bin";
    if (resume && !out_dir.empty() && std::filesystem::exists(state_path)) {
        state = load_train_state(state_path);
    } else {
        state = init_train_state(config);
    }

    if (!out_dir.empty()) {
        std::error_code ec;
        std::filesystem::create_directories(out_dir, ec);
        if (ec || !std::filesystem::is_directory(out_dir)) {
            throw IoError("cannot create output directory " + out_dir.string());
        }
    }

    Rng root(config.seed);
    const int steps_per_epoch = n / batch;  // trailing partial batches are dropped
    for (int epoch = state.epoch; epoch < config.epochs; ++epoch) {
        Rng epoch_rng = root.derive(0x9000 + static_cast<std::uint64_t>(epoch));
        std::vector<int> order(static_cast<std::size_t>(n));
        std::iota(order.begin(), order.end(), 0);
        for (std::size_t i = order.size(); i > 1; --i) {
            std::swap(order[i - 1], order[epoch_rng.uniform_int(i)]);
        }

        const double lr = learning_rate_for_epoch(config, epoch);
        double epoch_loss = 0.0;
        for (int step = 0; step < steps_per_epoch; ++step) {
            std::vector<Image> chunk;
            chunk.reserve(static_cast<std::size_t>(batch));
            for (int i = 0; i < batch; ++i) {
                chunk.push_back(images[static_cast<std::size_t>(order[step * batch + i])]);
            }
            const Rng step_rng = epoch_rng.derive(0x51E9 + static_cast<std::uint64_t>(step));
            epoch_loss += train_step(state, chunk, config, lr, step_rng);
        }
        state.loss_history.push_back(epoch_loss / std::max(1, steps_per_epoch));
        state.epoch = epoch + 1;

        if (!out_dir.empty()) {
            save_encoder(state.query, out_dir / "encoder.clic");
            save_train_state(state, state_path);
            write_sidecar(config, state, out_dir / "train.json");
        }
    }

    TrainResult result;
    result.params = state.query;
    result.loss_history = state.loss_history;
    result.state = std::move(state);
    return result;
}

namespace {

constexpr char kStateMagic[6] = {'C', 'L', 'I', 'C', 'T', '1'};

void put_u64(std::ostream& out, std::uint64_t v) {
    unsigned char bytes[8];
    for (int i = 0; i < 8; ++i) {
        bytes[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xff);
    }
    out.write(reinterpret_cast<const char*>(bytes), 8);
}

std::uint64_t get_u64(std::istream& in) {
    unsigned char bytes[8];
    in.read(reinterpret_cast<char*>(bytes), 8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) {
        v |= static_cast<std::uint64_t>(bytes[i]) << (8 * i);
    }
    return v;
}

void put_f64_array(std::ostream& out, const double* data, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
        std::uint64_t bits;
        std::memcpy(&bits, &data[i], 8);
        put_u64(out, bits);
    }
}

void get_f64_array(std::istream& in, double* data, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
        const std::uint64_t bits = get_u64(in);
        std::memcpy(&data[i], &bits, 8);
    }
}

}  // namespace

void save_train_state(const TrainState& state, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoError("cannot write " + path.string());
    }
    out.write(kStateMagic, 6);
    put_u64(out, static_cast<std::uint64_t>(state.epoch));
    put_u64(out, static_cast<std::uint64_t>(state.queue.capacity()));
    put_u64(out, static_cast<std::uint64_t>(state.queue.ptr()));
    put_u64(out, static_cast<std::uint64_t>(state.query.data.size()));
    put_f64_array(out, state.query.data.data(), state.query.data.size());
    put_f64_array(out, state.key.data.data(), state.key.data.size());
    put_f64_array(out, state.velocity.data.data(), state.velocity.data.size());
    for (const auto& key : state.queue.keys()) {
        put_f64_array(out, key.data(), key.size());
    }
    put_u64(out, static_cast<std::uint64_t>(state.loss_history.size()));
    put_f64_array(out, state.loss_history.data(), state.loss_history.size());
    if (!out) {
        throw IoError("short write to " + path.string());
    }
}

TrainState load_train_state(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open " + path.string());
    }
    char magic[6];
    in.read(magic, 6);
    if (!in || std::memcmp(magic, kStateMagic, 6) != 0) {
        throw IoError(path.string() + " is not a trainer state file");
    }
    TrainState state;
    state.epoch = static_cast<int>(get_u64(in));
    const auto capacity = static_cast<int>(get_u64(in));
    const auto ptr = static_cast<int>(get_u64(in));
    const auto param_count = get_u64(in);
    if (param_count != encoder_param_count()) {
        throw ShapeMismatch(path.string() + " was written for a different parameter layout");
    }
    state.query = EncoderParams::zeros();
    state.key = EncoderParams::zeros();
    state.velocity = EncoderParams::zeros();
    get_f64_array(in, state.query.data.data(), param_count);
    get_f64_array(in, state.key.data.data(), param_count);
    get_f64_array(in, state.velocity.data.data(), param_count);
    std::vector<Embedding> keys(static_cast<std::size_t>(capacity));
    for (auto& key : keys) {
        get_f64_array(in, key.data(), key.size());
    }
    NegativeQueue queue(capacity);
    // Rebuild FIFO position: enqueue in storage order, then advance to ptr.
    if (capacity > 0) {
        queue.enqueue(keys);
        while (queue.ptr() != ptr) {
            queue.enqueue(std::span<const Embedding>(&keys[static_cast<std::size_t>(
                              queue.ptr())],
                          1));
        }
    }
    state.queue = std::move(queue);
    state.loss_history.resize(get_u64(in));
    get_f64_array(in, state.loss_history.data(), state.loss_history.size());
    if (!in) {
        throw IoError(path.string() + " is truncated");
    }
    return state;
}

}  // namespace clic
