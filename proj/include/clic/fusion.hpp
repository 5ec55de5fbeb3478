#pragma once

#include <filesystem>
#include <vector>

#include "clic/encoder.hpp"
#include "clic/image.hpp"

namespace clic {

/// Channel-major (CHW) activation grid exchanged with a host task.
struct FeatureMap {
    int channels = 0;
    int height = 0;
    int width = 0;
    std::vector<double> data;

    double at(int c, int y, int x) const {
        return data[(static_cast<std::size_t>(c) * height + y) * width + x];
    }
    double& at(int c, int y, int x) {
        return data[(static_cast<std::size_t>(c) * height + y) * width + x];
    }
};

/// Post-activation output of each conv block as a feature map. For the
/// 64x64 encoder input the spatial sides are 32, 16, 8, 4 with channel
/// counts 16, 32, 64, 64. Read-only with respect to the encoder: no
/// gradient path exists out of this function.
std::vector<FeatureMap> extract_stage_maps(const EncoderParams& encoder, const Image& img);

/// Bilinear resize of every channel to a new spatial size, corner-aligned
/// like the image resizer.
FeatureMap resize_map(const FeatureMap& map, int height, int width);

/// task + weight * aligned(ic): the complexity map is resized to the task's
/// spatial size and, when channel counts differ, reduced to its per-pixel
/// channel mean and broadcast across the task's channels.
FeatureMap fuse(const FeatureMap& task_map, const FeatureMap& ic_map, double weight = 0.5);

/// Feature maps ride the same blob container as checkpoints, one section
/// named "feature_map" shaped [channels, height, width].
void write_feature_map(const FeatureMap& map, const std::filesystem::path& path);
FeatureMap read_feature_map(const std::filesystem::path& path);

}  // namespace clic
