#include "clic/rcm.hpp"

#include <algorithm>
#include <string>

#include "clic/error.hpp"

namespace clic {

CropPlan plan_crops(int height, int width, int c) {
    if (c < 2) {
        throw InvalidC("c must be at least 2, got " + std::to_string(c));
    }
    const int L = std::min(height, width);
    if (L < 4 * c) {
        throw ImageTooSmall("short side " + std::to_string(L) + " is below 4c = " +
                            std::to_string(4 * c));
    }
    CropPlan plan;
    plan.L = L;
    plan.c = c;
    plan.levels = {CropPlan::Level{L / c, c}, CropPlan::Level{L / (2 * c), 2 * c},
                   CropPlan::Level{L / (4 * c), 4 * c}};
    return plan;
}

std::vector<std::pair<int, Rect>> random_crop_rects(const CropPlan& plan, int image_width,
                                                    int image_height, Rng& rng) {
    std::vector<std::pair<int, Rect>> rects;
    rects.reserve(static_cast<std::size_t>(plan.total_crops()));
    for (int level = 0; level < 3; ++level) {
        const auto [side, count] = plan.levels[static_cast<std::size_t>(level)];
        const auto max_x = static_cast<std::uint64_t>(image_width - side + 1);
        const auto max_y = static_cast<std::uint64_t>(image_height - side + 1);
        for (int i = 0; i < count; ++i) {
            Rect r;
            r.x = static_cast<int>(rng.uniform_int(max_x));
            r.y = static_cast<int>(rng.uniform_int(max_y));
            r.side = side;
            rects.emplace_back(level, r);
        }
    }
    return rects;
}

std::vector<LeveledCrop> random_crop_set(const Image& img, const CropPlan& plan, Rng& rng) {
    std::vector<LeveledCrop> crops;
    crops.reserve(static_cast<std::size_t>(plan.total_crops()));
    for (auto& [level, rect] : random_crop_rects(plan, img.width, img.height, rng)) {
        crops.push_back(LeveledCrop{level, rect, crop(img, rect)});
    }
    return crops;
}

TransformSpec draw_transform(Rng& rng) {
    TransformSpec spec;
    spec.hflip = rng.bernoulli(0.5);
    if (rng.bernoulli(0.5)) {
        spec.quarter_turns = static_cast<int>(rng.uniform_int(4));
    }
    spec.jitter = rng.bernoulli(0.5);
    if (spec.jitter) {
        for (int c = 0; c < 3; ++c) {
            spec.jitter_scale[static_cast<std::size_t>(c)] =
                static_cast<float>(rng.uniform(0.6, 1.4));
            spec.jitter_shift[static_cast<std::size_t>(c)] =
                static_cast<float>(rng.uniform(-0.2, 0.2));
        }
    }
    spec.gray_collapse = rng.bernoulli(0.2);
    return spec;
}

namespace {

Image rotate_quarter(const Image& img, int turns) {
    if (turns % 4 == 0) {
        return img;
    }
    const int side = img.width;  // square tiles only
    Image out(side, side, img.channels);
    for (int y = 0; y < side; ++y) {
        for (int x = 0; x < side; ++x) {
            int sx = x;
            int sy = y;
            switch (turns % 4) {
                case 1:  // 90 degrees CCW: out(x, y) = in(side-1-y, x)
                    sx = side - 1 - y;
                    sy = x;
                    break;
                case 2:
                    sx = side - 1 - x;
                    sy = side - 1 - y;
                    break;
                case 3:
                    sx = y;
                    sy = side - 1 - x;
                    break;
                default:
                    break;
            }
            for (int c = 0; c < img.channels; ++c) {
                out.at(x, y, c) = img.at(sx, sy, c);
            }
        }
    }
    return out;
}

}  // namespace

Image apply_transform(const Image& tile, const TransformSpec& spec) {
    Image out = tile;
    if (spec.hflip) {
        for (int y = 0; y < out.height; ++y) {
            for (int x = 0; x < out.width / 2; ++x) {
                for (int c = 0; c < out.channels; ++c) {
                    std::swap(out.at(x, y, c), out.at(out.width - 1 - x, y, c));
                }
            }
        }
    }
    out = rotate_quarter(out, spec.quarter_turns);
    if (spec.jitter) {
        for (int y = 0; y < out.height; ++y) {
            for (int x = 0; x < out.width; ++x) {
                for (int c = 0; c < out.channels; ++c) {
                    const auto ci = static_cast<std::size_t>(out.channels == 1 ? 0 : c);
                    const float v = spec.jitter_scale[ci] * out.at(x, y, c) +
                                    spec.jitter_shift[ci];
                    out.at(x, y, c) = std::clamp(v, 0.0f, 1.0f);
                }
            }
        }
    }
    if (spec.gray_collapse && out.channels == 3) {
        for (int y = 0; y < out.height; ++y) {
            for (int x = 0; x < out.width; ++x) {
                const float luma = 0.299f * out.at(x, y, 0) + 0.587f * out.at(x, y, 1) +
                                   0.114f * out.at(x, y, 2);
                out.at(x, y, 0) = luma;
                out.at(x, y, 1) = luma;
                out.at(x, y, 2) = luma;
            }
        }
    }
    return out;
}

Image transform_crop(const Image& tile, Rng& rng) {
    return apply_transform(tile, draw_transform(rng));
}

namespace {

MixedSample make_mixed(const Image& a, const Image& b, int scale_level,
                       const std::string& source_id, Rng& rng) {
    MixedSample sample;
    sample.tile_side = a.width;
    sample.scale_level = scale_level;
    sample.source_id = source_id;
    sample.tiles[0] = a;
    sample.tiles[1] = b;
    sample.tiles[2] = apply_transform(a, draw_transform(rng));
    sample.tiles[3] = apply_transform(b, draw_transform(rng));

    const int side = sample.tile_side;
    Image canvas(2 * side, 2 * side, a.channels);
    const std::array<std::pair<int, int>, 4> origin{
        std::pair{0, 0}, {side, 0}, {0, side}, {side, side}};
    for (std::size_t t = 0; t < 4; ++t) {
        const auto [ox, oy] = origin[t];
        const Image& tile = sample.tiles[t];
        for (int y = 0; y < side; ++y) {
            for (int x = 0; x < side; ++x) {
                for (int c = 0; c < canvas.channels; ++c) {
                    canvas.at(ox + x, oy + y, c) = tile.at(x, y, c);
                }
            }
        }
    }
    sample.canvas = std::move(canvas);
    return sample;
}

}  // namespace

std::vector<MixedSample> mix_pairs(const std::vector<LeveledCrop>& crops, Rng& rng,
                                   const std::string& source_id) {
    std::vector<MixedSample> samples;
    for (int level = 0; level < 3; ++level) {
        std::vector<const Image*> pool;
        for (const auto& crop : crops) {
            if (crop.scale_level == level) {
                pool.push_back(&crop.image);
            }
        }
        // Fisher-Yates, then pair consecutive entries.
        for (std::size_t i = pool.size(); i > 1; --i) {
            std::swap(pool[i - 1], pool[rng.uniform_int(i)]);
        }
        for (std::size_t i = 0; i + 1 < pool.size(); i += 2) {
            samples.push_back(make_mixed(*pool[i], *pool[i + 1], level, source_id, rng));
        }
        if (pool.size() % 2 == 1) {
            const Image* leftover = pool.back();
            samples.push_back(make_mixed(*leftover, *leftover, level, source_id, rng));
        }
    }
    return samples;
}

std::vector<MixedSample> rcm_positives(const Image& img, int c, Rng& rng,
                                       const std::string& source_id) {
    const CropPlan plan = plan_crops(img.height, img.width, c);
    const auto crops = random_crop_set(img, plan, rng);
    return mix_pairs(crops, rng, source_id);
}

}  // namespace clic
