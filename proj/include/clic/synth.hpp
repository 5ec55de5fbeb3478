#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "clic/image.hpp"
#include "clic/manifest.hpp"
#include "clic/rng.hpp"

namespace clic {

/// One procedural image. Kinds cycle through constant, noise, stripe, and
/// checkerboard; each draw varies levels, period, and a noise blend so the
/// corpus covers the whole complexity range.
Image synth_image(int index, int side, Rng& rng);

/// Writes `count` PNGs (side x side, named synth_<kind>_<index>.png) under
/// out_dir and returns a manifest whose scores are each image's measured
/// normalized entropy. Paths in the manifest are relative to the manifest's
/// own directory only if out_dir is relative; they are stored as given.
Manifest synth_corpus(int count, int side, std::uint64_t seed,
                      const std::filesystem::path& out_dir);

}  // namespace clic
