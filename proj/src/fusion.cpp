#include "clic/fusion.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "clic/checkpoint.hpp"
#include "clic/error.hpp"

namespace clic {

std::vector<FeatureMap> extract_stage_maps(const EncoderParams& encoder, const Image& img) {
    ForwardTrace trace;
    encoder_forward(encoder, batch_from_images({img}), &trace);

    std::vector<FeatureMap> maps;
    maps.reserve(kStageCount);
    for (int stage = 0; stage < kStageCount; ++stage) {
        FeatureMap map;
        map.channels = kStageChannels[static_cast<std::size_t>(stage) + 1];
        map.height = kStageSides[static_cast<std::size_t>(stage)];
        map.width = map.height;
        map.data = trace.stage_out[static_cast<std::size_t>(stage)];  // batch of one
        maps.push_back(std::move(map));
    }
    return maps;
}

FeatureMap resize_map(const FeatureMap& map, int height, int width) {
    if (height < 1 || width < 1) {
        throw ShapeMismatch("resize_map target must be at least 1x1");
    }
    FeatureMap out;
    out.channels = map.channels;
    out.height = height;
    out.width = width;
    out.data.resize(static_cast<std::size_t>(map.channels) * height * width);

    const double sy = (height > 1) ? static_cast<double>(map.height - 1) / (height - 1) : 0.0;
    const double sx = (width > 1) ? static_cast<double>(map.width - 1) / (width - 1) : 0.0;
    for (int c = 0; c < map.channels; ++c) {
        for (int y = 0; y < height; ++y) {
            const double fy = y * sy;
            const int y0 = std::min(static_cast<int>(fy), map.height - 1);
            const int y1 = std::min(y0 + 1, map.height - 1);
            const double wy = fy - y0;
            for (int x = 0; x < width; ++x) {
                const double fx = x * sx;
                const int x0 = std::min(static_cast<int>(fx), map.width - 1);
                const int x1 = std::min(x0 + 1, map.width - 1);
                const double wx = fx - x0;
                const double top = map.at(c, y0, x0) * (1.0 - wx) + map.at(c, y0, x1) * wx;
                const double bottom = map.at(c, y1, x0) * (1.0 - wx) + map.at(c, y1, x1) * wx;
                out.at(c, y, x) = top * (1.0 - wy) + bottom * wy;
            }
        }
    }
    return out;
}

FeatureMap fuse(const FeatureMap& task_map, const FeatureMap& ic_map, double weight) {
    FeatureMap aligned = (ic_map.height == task_map.height && ic_map.width == task_map.width)
                             ? ic_map
                             : resize_map(ic_map, task_map.height, task_map.width);

    FeatureMap out = task_map;
    if (aligned.channels == task_map.channels) {
        for (std::size_t i = 0; i < out.data.size(); ++i) {
            out.data[i] += weight * aligned.data[i];
        }
        return out;
    }

    // Channel counts differ: collapse to the per-pixel channel mean and
    // broadcast it across every task channel.
    const double inv = 1.0 / aligned.channels;
    for (int y = 0; y < out.height; ++y) {
        for (int x = 0; x < out.width; ++x) {
            double mean = 0.0;
            for (int c = 0; c < aligned.channels; ++c) {
                mean += aligned.at(c, y, x);
            }
            mean *= inv;
            for (int c = 0; c < out.channels; ++c) {
                out.at(c, y, x) += weight * mean;
            }
        }
    }
    return out;
}

void write_feature_map(const FeatureMap& map, const std::filesystem::path& path) {
    BlobSection section;
    section.name = "feature_map";
    section.shape = {map.channels, map.height, map.width};
    section.data.assign(map.data.begin(), map.data.end());
    write_blob(path, {section});
}

FeatureMap read_feature_map(const std::filesystem::path& path) {
    const auto sections = read_blob(path);
    for (const auto& section : sections) {
        if (section.name != "feature_map") {
            continue;
        }
        if (section.shape.size() != 3) {
            throw ShapeMismatch(path.string() + ": feature_map must be rank 3");
        }
        FeatureMap map;
        map.channels = section.shape[0];
        map.height = section.shape[1];
        map.width = section.shape[2];
        map.data.assign(section.data.begin(), section.data.end());
        return map;
    }
    throw ShapeMismatch(path.string() + " holds no feature_map section");
}

}  // namespace clic
