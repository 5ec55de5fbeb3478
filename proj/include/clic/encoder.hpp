#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "clic/image.hpp"
#include "clic/rng.hpp"
#include "clic/tensor.hpp"

namespace clic {

inline constexpr int kEncoderInputSide = 64;
inline constexpr int kEmbedDim = 128;
inline constexpr int kStageCount = 4;
inline constexpr std::array<int, kStageCount + 1> kStageChannels{3, 16, 32, 64, 64};
inline constexpr std::array<int, kStageCount> kStageSides{32, 16, 8, 4};

/// One named parameter block inside the flat buffer.
struct ParamEntry {
    std::string name;
    std::vector<int> shape;
    std::size_t offset;
    std::size_t size;
};

/// Declaration-order layout of every encoder parameter: four 3x3 stride-2
/// conv blocks (3->16->32->64->64, bias per channel) followed by the
/// projection head (64->128, ReLU, 128->128).
const std::vector<ParamEntry>& encoder_layout();

/// Total parameter count across the layout.
std::size_t encoder_param_count();

/// All encoder parameters in one flat buffer; gradients and optimizer
/// velocity reuse the same layout.
struct EncoderParams {
    std::vector<double> data;

    static EncoderParams zeros();
    /// He fan-in scaling with every kernel and row centered to zero mean, so
    /// distinct inputs spread out in embedding space from the first step (the
    /// conditioning role batch-norm plays in bigger nets). Conv biases start
    /// slightly positive to keep flat inputs activating; head biases at zero.
    static EncoderParams centered_init(Rng& rng);

    std::span<double> block(int index);
    std::span<const double> block(int index) const;
};

/// Unit-length embedding produced by the projection head.
using Embedding = std::array<double, kEmbedDim>;

/// Per-batch activations kept for the backward pass (post-ReLU conv stages,
/// pooled features, head activations, pre-normalization outputs).
struct ForwardTrace {
    int batch = 0;
    std::array<std::vector<double>, kStageCount> stage_out;
    std::vector<double> pooled;
    std::vector<double> fc1_out;
    std::vector<double> fc2_out;
    std::vector<double> norms;
};

/// Runs the conv stack, global average pool, projection head, and L2
/// normalization on an N x 3 x 64 x 64 batch. Throws ShapeMismatch on any
/// other shape and NormalizationDegenerate when a pre-normalization vector
/// is exactly zero (e.g. all-zero parameters).
std::vector<Embedding> encoder_forward(const EncoderParams& params, const Tensor& batch,
                                       ForwardTrace* trace = nullptr);

/// Exact reverse-mode gradients of the full composition given upstream
/// gradients on the normalized embeddings. Requires the trace recorded by
/// encoder_forward on the same inputs.
EncoderParams encoder_backward(const EncoderParams& params, const Tensor& batch,
                               const ForwardTrace& trace,
                               const std::vector<Embedding>& upstream);

/// SGD with classic momentum and coupled weight decay:
///   v <- momentum * v + grad + weight_decay * param
///   param <- param - lr * v
void sgd_step(EncoderParams& params, const EncoderParams& grads, double lr, double momentum,
              double weight_decay, EncoderParams& velocity);

/// Packs images into an N x 3 x 64 x 64 batch, resizing as needed and
/// replicating single-channel inputs across RGB.
Tensor batch_from_images(const std::vector<Image>& images);

}  // namespace clic
