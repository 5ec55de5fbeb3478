#pragma once

#include <array>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "clic/image.hpp"
#include "clic/manifest.hpp"
#include "clic/rng.hpp"

namespace clic {

/// Multi-scale crop plan for one image. With short side L and hyperparameter
/// c, the three levels use sides L/c, L/2c, L/4c and counts c, 2c, 4c, for
/// 7c crops total.
struct CropPlan {
    int L = 0;  // min(height, width) of the source
    int c = 0;
    struct Level {
        int side;
        int count;
    };
    std::array<Level, 3> levels{};

    int total_crops() const { return 7 * c; }
};

/// One crop tagged with the scale level (0 = largest side) it came from.
struct LeveledCrop {
    int scale_level = 0;
    Rect rect;
    Image image;
};

/// Deterministic description of one augmentation draw. Applied in a fixed
/// order: horizontal flip, quarter-turn rotation, per-channel affine color
/// jitter (clamped to [0,1]), grayscale collapse.
struct TransformSpec {
    bool hflip = false;
    int quarter_turns = 0;  // 0..3, counter-clockwise
    bool jitter = false;
    std::array<float, 3> jitter_scale{1.0f, 1.0f, 1.0f};
    std::array<float, 3> jitter_shift{0.0f, 0.0f, 0.0f};
    bool gray_collapse = false;
};

/// Composite positive sample: two same-scale crops and their transformed
/// copies tiled on a 2x2 canvas [a, b; T(a), T(b)].
struct MixedSample {
    int tile_side = 0;
    std::array<Image, 4> tiles;  // a, b, T(a), T(b)
    Image canvas;                // side 2 * tile_side
    std::string source_id;
    int scale_level = 0;
};

/// Builds the three-level plan. Throws InvalidC when c < 2 and ImageTooSmall
/// when min(height, width) < 4c (the smallest level would collapse to zero).
CropPlan plan_crops(int height, int width, int c);

/// Draws the crop geometry only: per level, `count` square rects at offsets
/// uniform over all valid positions. Crops may overlap.
std::vector<std::pair<int, Rect>> random_crop_rects(const CropPlan& plan, int image_width,
                                                    int image_height, Rng& rng);

/// Executes the plan against the image: exactly 7c crops.
std::vector<LeveledCrop> random_crop_set(const Image& img, const CropPlan& plan, Rng& rng);

/// Draws one augmentation: flip with p=0.5, rotation by a uniform multiple
/// of 90 degrees with p=0.5, per-channel affine jitter (scale in [0.6, 1.4],
/// shift in [-0.2, 0.2]) with p=0.5, grayscale collapse with p=0.2.
TransformSpec draw_transform(Rng& rng);

/// Applies a spec to a square tile. Output side equals input side and
/// intensities stay in [0, 1].
Image apply_transform(const Image& tile, const TransformSpec& spec);

/// draw_transform + apply_transform in one call.
Image transform_crop(const Image& tile, Rng& rng);

/// Pairs crops at random within each scale level and tiles every pair with
/// its transformed copies. A level with an odd crop count self-pairs the
/// leftover crop, so each level emits ceil(count / 2) samples and the totals
/// land on 7 / 11 / 14 / 18 for c = 2..5.
std::vector<MixedSample> mix_pairs(const std::vector<LeveledCrop>& crops, Rng& rng,
                                   const std::string& source_id = "");

/// Full pipeline: plan, crop, mix. At least 7 positive samples for any
/// valid c; (image, c, seed) determines the output bit-exactly.
std::vector<MixedSample> rcm_positives(const Image& img, int c, Rng& rng,
                                       const std::string& source_id = "");

/// Number of mixed samples rcm_positives emits for a given c.
constexpr int mixed_sample_count(int c) { return (c + 1) / 2 + c + 2 * c; }

struct ExpandResult {
    Manifest manifest;
    /// (source path, reason) for entries that failed to decode or were too
    /// small for the requested c. Failures skip the entry, never abort.
    std::vector<std::pair<std::string, std::string>> failures;
};

/// Writes every mixed sample of every manifest entry to out_dir as
/// `<source_stem>_rcm_<level>_<index>.png` and returns the manifest of
/// generated images (originals appended when keep_originals is set). Each
/// entry draws from a child generator keyed by its manifest position, so a
/// fixed (manifest, c, seed) triple reproduces every byte.
ExpandResult expand_dataset(const Manifest& manifest, int c, Rng& rng,
                            const std::filesystem::path& out_dir, bool keep_originals);

}  // namespace clic
