#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "clic/image.hpp"

namespace clic {

/// Decodes a PNG or JPEG byte stream into an Image with intensities mapped
/// from [0, 255] to [0, 1] by division by 255. Throws DecodeError on
/// corrupt or unsupported data.
Image decode_image(const std::vector<std::uint8_t>& bytes);

/// Reads and decodes an image file. Throws IoError / DecodeError.
Image load_image(const std::filesystem::path& path);

/// Encodes an Image (intensities quantized back to 8-bit) as PNG bytes.
std::vector<std::uint8_t> encode_png(const Image& img);

/// Writes an Image to a PNG file. Throws IoError when the file cannot be
/// written.
void write_png(const Image& img, const std::filesystem::path& path);

}  // namespace clic
