#include "clic/encoder.hpp"

#include <cmath>
#include <cstring>

#include "clic/error.hpp"

namespace clic {

namespace {

std::vector<ParamEntry> build_layout() {
    std::vector<ParamEntry> layout;
    std::size_t offset = 0;
    auto add = [&](std::string name, std::vector<int> shape) {
        const std::size_t size = Tensor::element_count(shape);
        layout.push_back(ParamEntry{std::move(name), std::move(shape), offset, size});
        offset += size;
    };
    for (int s = 0; s < kStageCount; ++s) {
        const std::string stem = "conv" + std::to_string(s + 1);
        add(stem + ".weight", {kStageChannels[s + 1], kStageChannels[s], 3, 3});
        add(stem + ".bias", {kStageChannels[s + 1]});
    }
    add("fc1.weight", {kEmbedDim, kStageChannels[kStageCount]});
    add("fc1.bias", {kEmbedDim});
    add("fc2.weight", {kEmbedDim, kEmbedDim});
    add("fc2.bias", {kEmbedDim});
    return layout;
}

constexpr double kNormEpsilon = 1e-12;

}  // namespace

const std::vector<ParamEntry>& encoder_layout() {
    static const std::vector<ParamEntry> layout = build_layout();
    return layout;
}

std::size_t encoder_param_count() {
    const auto& layout = encoder_layout();
    return layout.back().offset + layout.back().size;
}

EncoderParams EncoderParams::zeros() {
    EncoderParams p;
    p.data.assign(encoder_param_count(), 0.0);
    return p;
}

EncoderParams EncoderParams::centered_init(Rng& rng) {
    EncoderParams p = zeros();
    for (const auto& entry : encoder_layout()) {
        if (entry.name.ends_with(".bias")) {
            if (entry.name.starts_with("conv")) {
                for (std::size_t i = 0; i < entry.size; ++i) {
                    p.data[entry.offset + i] = 0.05;
                }
            }
            continue;
        }
        std::size_t fan_in = 1;
        for (std::size_t d = 1; d < entry.shape.size(); ++d) {
            fan_in *= static_cast<std::size_t>(entry.shape[d]);
        }
        const double sigma = std::sqrt(2.0 / static_cast<double>(fan_in));
        const std::size_t rows = entry.size / fan_in;
        for (std::size_t r = 0; r < rows; ++r) {
            double* w = p.data.data() + entry.offset + r * fan_in;
            double mean = 0.0;
            for (std::size_t i = 0; i < fan_in; ++i) {
                w[i] = sigma * rng.gaussian();
                mean += w[i];
            }
            mean /= static_cast<double>(fan_in);
            for (std::size_t i = 0; i < fan_in; ++i) {
                w[i] -= mean;
            }
        }
    }
    return p;
}

std::span<double> EncoderParams::block(int index) {
    const auto& entry = encoder_layout()[static_cast<std::size_t>(index)];
    return {data.data() + entry.offset, entry.size};
}

std::span<const double> EncoderParams::block(int index) const {
    const auto& entry = encoder_layout()[static_cast<std::size_t>(index)];
    return {data.data() + entry.offset, entry.size};
}

namespace {

// 3x3 conv, stride 2, zero padding 1. Input side is always 2x the output
// side, which pins the valid ranges: kernel row/col 0 skips output row/col 0
// and everything else stays in bounds.
void conv_forward(const double* in, int in_ch, int in_side, const double* weight,
                  const double* bias, double* out, int out_ch, int out_side) {
    for (int o = 0; o < out_ch; ++o) {
        double* out_plane = out + static_cast<std::size_t>(o) * out_side * out_side;
        for (int i = 0; i < out_side * out_side; ++i) {
            out_plane[i] = bias[o];
        }
        for (int ic = 0; ic < in_ch; ++ic) {
            const double* in_plane = in + static_cast<std::size_t>(ic) * in_side * in_side;
            const double* w = weight + ((static_cast<std::size_t>(o) * in_ch + ic) * 9);
            for (int ky = 0; ky < 3; ++ky) {
                const int y_lo = (ky == 0) ? 1 : 0;
                for (int kx = 0; kx < 3; ++kx) {
                    const int x_lo = (kx == 0) ? 1 : 0;
                    const double wv = w[ky * 3 + kx];
                    for (int y = y_lo; y < out_side; ++y) {
                        const double* in_row = in_plane + (2 * y + ky - 1) * in_side;
                        double* out_row = out_plane + y * out_side;
                        for (int x = x_lo; x < out_side; ++x) {
                            out_row[x] += wv * in_row[2 * x + kx - 1];
                        }
                    }
                }
            }
        }
    }
}

// Accumulates weight/bias gradients and (optionally) input gradients for the
// same conv geometry. `din` may be null for the first stage.
void conv_backward(const double* in, int in_ch, int in_side, const double* weight,
                   const double* dout, int out_ch, int out_side, double* dweight,
                   double* dbias, double* din) {
    for (int o = 0; o < out_ch; ++o) {
        const double* dout_plane = dout + static_cast<std::size_t>(o) * out_side * out_side;
        double acc_bias = 0.0;
        for (int i = 0; i < out_side * out_side; ++i) {
            acc_bias += dout_plane[i];
        }
        dbias[o] += acc_bias;
        for (int ic = 0; ic < in_ch; ++ic) {
            const double* in_plane = in + static_cast<std::size_t>(ic) * in_side * in_side;
            double* din_plane =
                din ? din + static_cast<std::size_t>(ic) * in_side * in_side : nullptr;
            const std::size_t wbase = (static_cast<std::size_t>(o) * in_ch + ic) * 9;
            for (int ky = 0; ky < 3; ++ky) {
                const int y_lo = (ky == 0) ? 1 : 0;
                for (int kx = 0; kx < 3; ++kx) {
                    const int x_lo = (kx == 0) ? 1 : 0;
                    const double wv = weight[wbase + ky * 3 + kx];
                    double acc_w = 0.0;
                    for (int y = y_lo; y < out_side; ++y) {
                        const double* in_row = in_plane + (2 * y + ky - 1) * in_side;
                        double* din_row =
                            din_plane ? din_plane + (2 * y + ky - 1) * in_side : nullptr;
                        const double* dout_row = dout_plane + y * out_side;
                        for (int x = x_lo; x < out_side; ++x) {
                            const double g = dout_row[x];
                            acc_w += g * in_row[2 * x + kx - 1];
                            if (din_row) {
                                din_row[2 * x + kx - 1] += wv * g;
                            }
                        }
                    }
                    dweight[wbase + ky * 3 + kx] += acc_w;
                }
            }
        }
    }
}

void check_batch_shape(const Tensor& batch) {
    if (batch.shape.size() != 4 || batch.shape[1] != 3 ||
        batch.shape[2] != kEncoderInputSide || batch.shape[3] != kEncoderInputSide ||
        batch.shape[0] < 1) {
        throw ShapeMismatch("encoder expects N x 3 x 64 x 64 input");
    }
    if (batch.data.size() != Tensor::element_count(batch.shape)) {
        throw ShapeMismatch("tensor data size does not match its shape");
    }
}

std::size_t stage_volume(int s) {
    return static_cast<std::size_t>(kStageChannels[s + 1]) * kStageSides[s] * kStageSides[s];
}

}  // namespace

std::vector<Embedding> encoder_forward(const EncoderParams& params, const Tensor& batch,
                                       ForwardTrace* trace) {
    check_batch_shape(batch);
    if (params.data.size() != encoder_param_count()) {
        throw ShapeMismatch("parameter buffer has wrong size");
    }
    const int n = batch.shape[0];
    const int pool_ch = kStageChannels[kStageCount];

    ForwardTrace local;
    ForwardTrace& t = trace ? *trace : local;
    t.batch = n;
    for (int s = 0; s < kStageCount; ++s) {
        t.stage_out[static_cast<std::size_t>(s)].assign(n * stage_volume(s), 0.0);
    }
    t.pooled.assign(static_cast<std::size_t>(n) * pool_ch, 0.0);
    t.fc1_out.assign(static_cast<std::size_t>(n) * kEmbedDim, 0.0);
    t.fc2_out.assign(static_cast<std::size_t>(n) * kEmbedDim, 0.0);
    t.norms.assign(static_cast<std::size_t>(n), 0.0);

    const double* fc1_w = params.block(8).data();
    const double* fc1_b = params.block(9).data();
    const double* fc2_w = params.block(10).data();
    const double* fc2_b = params.block(11).data();

    std::vector<Embedding> embeddings(static_cast<std::size_t>(n));
    const std::size_t input_volume = 3u * kEncoderInputSide * kEncoderInputSide;

    for (int s = 0; s < n; ++s) {
        const double* current = batch.data.data() + static_cast<std::size_t>(s) * input_volume;
        int side = kEncoderInputSide;
        for (int stage = 0; stage < kStageCount; ++stage) {
            double* out = t.stage_out[static_cast<std::size_t>(stage)].data() +
                          static_cast<std::size_t>(s) * stage_volume(stage);
            conv_forward(current, kStageChannels[stage], side,
                         params.block(stage * 2).data(), params.block(stage * 2 + 1).data(),
                         out, kStageChannels[stage + 1], kStageSides[stage]);
            const std::size_t vol = stage_volume(stage);
            for (std::size_t i = 0; i < vol; ++i) {
                if (out[i] < 0.0) {
                    out[i] = 0.0;
                }
            }
            current = out;
            side = kStageSides[stage];
        }

        double* pooled = t.pooled.data() + static_cast<std::size_t>(s) * pool_ch;
        const int last_side = kStageSides[kStageCount - 1];
        const double inv_cells = 1.0 / (last_side * last_side);
        for (int c = 0; c < pool_ch; ++c) {
            const double* plane = current + static_cast<std::size_t>(c) * last_side * last_side;
            double acc = 0.0;
            for (int i = 0; i < last_side * last_side; ++i) {
                acc += plane[i];
            }
            pooled[c] = acc * inv_cells;
        }

        double* h = t.fc1_out.data() + static_cast<std::size_t>(s) * kEmbedDim;
        for (int j = 0; j < kEmbedDim; ++j) {
            double acc = fc1_b[j];
            const double* row = fc1_w + static_cast<std::size_t>(j) * pool_ch;
            for (int c = 0; c < pool_ch; ++c) {
                acc += row[c] * pooled[c];
            }
            h[j] = acc > 0.0 ? acc : 0.0;
        }

        double* z = t.fc2_out.data() + static_cast<std::size_t>(s) * kEmbedDim;
        double norm_sq = 0.0;
        for (int k = 0; k < kEmbedDim; ++k) {
            double acc = fc2_b[k];
            const double* row = fc2_w + static_cast<std::size_t>(k) * kEmbedDim;
            for (int j = 0; j < kEmbedDim; ++j) {
                acc += row[j] * h[j];
            }
            z[k] = acc;
            norm_sq += acc * acc;
        }
        const double norm = std::sqrt(norm_sq);
        if (norm < kNormEpsilon) {
            throw NormalizationDegenerate("zero projection output cannot be normalized");
        }
        t.norms[static_cast<std::size_t>(s)] = norm;
        for (int k = 0; k < kEmbedDim; ++k) {
            embeddings[static_cast<std::size_t>(s)][static_cast<std::size_t>(k)] = z[k] / norm;
        }
    }
    return embeddings;
}

EncoderParams encoder_backward(const EncoderParams& params, const Tensor& batch,
                               const ForwardTrace& trace,
                               const std::vector<Embedding>& upstream) {
    check_batch_shape(batch);
    const int n = batch.shape[0];
    if (trace.batch != n || upstream.size() != static_cast<std::size_t>(n)) {
        throw ShapeMismatch("trace/upstream do not match the batch");
    }

    EncoderParams grads = EncoderParams::zeros();
    const int pool_ch = kStageChannels[kStageCount];
    const int last_side = kStageSides[kStageCount - 1];
    const std::size_t input_volume = 3u * kEncoderInputSide * kEncoderInputSide;

    const double* fc1_w = params.block(8).data();
    const double* fc2_w = params.block(10).data();
    double* dfc1_w = grads.block(8).data();
    double* dfc1_b = grads.block(9).data();
    double* dfc2_w = grads.block(10).data();
    double* dfc2_b = grads.block(11).data();

    std::vector<double> dz(kEmbedDim), dh(kEmbedDim), dpooled(pool_ch);
    std::array<std::vector<double>, kStageCount> dstage;
    for (int s = 0; s < kStageCount; ++s) {
        dstage[static_cast<std::size_t>(s)].assign(stage_volume(s), 0.0);
    }

    for (int s = 0; s < n; ++s) {
        const double* z = trace.fc2_out.data() + static_cast<std::size_t>(s) * kEmbedDim;
        const double* h = trace.fc1_out.data() + static_cast<std::size_t>(s) * kEmbedDim;
        const double* pooled = trace.pooled.data() + static_cast<std::size_t>(s) * pool_ch;
        const double norm = trace.norms[static_cast<std::size_t>(s)];
        const Embedding& g = upstream[static_cast<std::size_t>(s)];

        // Through L2 normalization: dz = (g - (g . e) e) / ||z||.
        double g_dot_e = 0.0;
        for (int k = 0; k < kEmbedDim; ++k) {
            g_dot_e += g[static_cast<std::size_t>(k)] * (z[k] / norm);
        }
        for (int k = 0; k < kEmbedDim; ++k) {
            dz[static_cast<std::size_t>(k)] =
                (g[static_cast<std::size_t>(k)] - g_dot_e * (z[k] / norm)) / norm;
        }

        std::fill(dh.begin(), dh.end(), 0.0);
        for (int k = 0; k < kEmbedDim; ++k) {
            const double gk = dz[static_cast<std::size_t>(k)];
            dfc2_b[k] += gk;
            const double* row = fc2_w + static_cast<std::size_t>(k) * kEmbedDim;
            double* drow = dfc2_w + static_cast<std::size_t>(k) * kEmbedDim;
            for (int j = 0; j < kEmbedDim; ++j) {
                drow[j] += gk * h[j];
                dh[static_cast<std::size_t>(j)] += row[j] * gk;
            }
        }

        std::fill(dpooled.begin(), dpooled.end(), 0.0);
        for (int j = 0; j < kEmbedDim; ++j) {
            if (h[j] <= 0.0) {
                continue;  // ReLU gate
            }
            const double gj = dh[static_cast<std::size_t>(j)];
            dfc1_b[j] += gj;
            const double* row = fc1_w + static_cast<std::size_t>(j) * pool_ch;
            double* drow = dfc1_w + static_cast<std::size_t>(j) * pool_ch;
            for (int c = 0; c < pool_ch; ++c) {
                drow[c] += gj * pooled[c];
                dpooled[static_cast<std::size_t>(c)] += row[c] * gj;
            }
        }

        // Global average pool spreads gradients uniformly over the 4x4 cells.
        auto& dlast = dstage[kStageCount - 1];
        const double inv_cells = 1.0 / (last_side * last_side);
        const double* last_out = trace.stage_out[kStageCount - 1].data() +
                                 static_cast<std::size_t>(s) * stage_volume(kStageCount - 1);
        for (int c = 0; c < pool_ch; ++c) {
            const double gc = dpooled[static_cast<std::size_t>(c)] * inv_cells;
            for (int i = 0; i < last_side * last_side; ++i) {
                const std::size_t idx = static_cast<std::size_t>(c) * last_side * last_side + i;
                dlast[idx] = last_out[idx] > 0.0 ? gc : 0.0;
            }
        }

        for (int stage = kStageCount - 1; stage >= 0; --stage) {
            const double* in =
                stage == 0 ? batch.data.data() + static_cast<std::size_t>(s) * input_volume
                           : trace.stage_out[static_cast<std::size_t>(stage - 1)].data() +
                                 static_cast<std::size_t>(s) * stage_volume(stage - 1);
            const int in_side = stage == 0 ? kEncoderInputSide : kStageSides[stage - 1];
            double* din = nullptr;
            if (stage > 0) {
                auto& buffer = dstage[static_cast<std::size_t>(stage - 1)];
                std::fill(buffer.begin(), buffer.end(), 0.0);
                din = buffer.data();
            }
            conv_backward(in, kStageChannels[stage], in_side, params.block(stage * 2).data(),
                          dstage[static_cast<std::size_t>(stage)].data(),
                          kStageChannels[stage + 1], kStageSides[stage],
                          grads.block(stage * 2).data(), grads.block(stage * 2 + 1).data(),
                          din);
            if (stage > 0) {
                // ReLU gate of the previous stage's output.
                const double* prev_out =
                    trace.stage_out[static_cast<std::size_t>(stage - 1)].data() +
                    static_cast<std::size_t>(s) * stage_volume(stage - 1);
                auto& buffer = dstage[static_cast<std::size_t>(stage - 1)];
                for (std::size_t i = 0; i < buffer.size(); ++i) {
                    if (prev_out[i] <= 0.0) {
                        buffer[i] = 0.0;
                    }
                }
            }
        }
    }
    return grads;
}

void sgd_step(EncoderParams& params, const EncoderParams& grads, double lr, double momentum,
              double weight_decay, EncoderParams& velocity) {
    if (params.data.size() != grads.data.size() ||
        params.data.size() != velocity.data.size()) {
        throw ShapeMismatch("sgd_step buffers disagree in size");
    }
    for (std::size_t i = 0; i < params.data.size(); ++i) {
        velocity.data[i] =
            momentum * velocity.data[i] + grads.data[i] + weight_decay * params.data[i];
        params.data[i] -= lr * velocity.data[i];
    }
}

Tensor batch_from_images(const std::vector<Image>& images) {
    Tensor batch({static_cast<int>(images.size()), 3, kEncoderInputSide, kEncoderInputSide});
    const std::size_t plane = static_cast<std::size_t>(kEncoderInputSide) * kEncoderInputSide;
    for (std::size_t n = 0; n < images.size(); ++n) {
        Image img = images[n];
        if (img.channels == 1) {
            img = gray_to_rgb(to_grayscale(img));
        }
        if (img.width != kEncoderInputSide || img.height != kEncoderInputSide) {
            img = resize(img, kEncoderInputSide, kEncoderInputSide);
        }
        double* dst = batch.data.data() + n * 3 * plane;
        for (int y = 0; y < kEncoderInputSide; ++y) {
            for (int x = 0; x < kEncoderInputSide; ++x) {
                for (int c = 0; c < 3; ++c) {
                    dst[c * plane + static_cast<std::size_t>(y) * kEncoderInputSide + x] =
                        img.at(x, y, c);
                }
            }
        }
    }
    return batch;
}

}  // namespace clic
