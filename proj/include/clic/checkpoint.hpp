#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "clic/encoder.hpp"

namespace clic {

/// One named tensor inside a binary blob file.
struct BlobSection {
    std::string name;
    std::vector<int> shape;
    std::vector<float> data;
};

/// Flat binary container: magic "CLIC1", a shape table (section count, then
/// per section name length, name, rank, dims, all little-endian u32 except
/// the u16 name length), followed by every section's float32 data in
/// declaration order.
void write_blob(const std::filesystem::path& path, const std::vector<BlobSection>& sections);
std::vector<BlobSection> read_blob(const std::filesystem::path& path);

/// Encoder parameters as a blob in layout declaration order.
void save_encoder(const EncoderParams& params, const std::filesystem::path& path);
EncoderParams load_encoder(const std::filesystem::path& path);

}  // namespace clic
