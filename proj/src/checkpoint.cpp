#include "clic/checkpoint.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>

#include "clic/error.hpp"

namespace clic {

namespace {

constexpr char kMagic[5] = {'C', 'L', 'I', 'C', '1'};

void put_u16(std::ostream& out, std::uint16_t v) {
    const unsigned char bytes[2] = {static_cast<unsigned char>(v & 0xff),
                                    static_cast<unsigned char>(v >> 8)};
    out.write(reinterpret_cast<const char*>(bytes), 2);
}

void put_u32(std::ostream& out, std::uint32_t v) {
    const unsigned char bytes[4] = {
        static_cast<unsigned char>(v & 0xff), static_cast<unsigned char>((v >> 8) & 0xff),
        static_cast<unsigned char>((v >> 16) & 0xff), static_cast<unsigned char>(v >> 24)};
    out.write(reinterpret_cast<const char*>(bytes), 4);
}

std::uint16_t get_u16(std::istream& in) {
    unsigned char bytes[2];
    in.read(reinterpret_cast<char*>(bytes), 2);
    return static_cast<std::uint16_t>(bytes[0] | (bytes[1] << 8));
}

std::uint32_t get_u32(std::istream& in) {
    unsigned char bytes[4];
    in.read(reinterpret_cast<char*>(bytes), 4);
    return static_cast<std::uint32_t>(bytes[0]) | (static_cast<std::uint32_t>(bytes[1]) << 8) |
           (static_cast<std::uint32_t>(bytes[2]) << 16) |
           (static_cast<std::uint32_t>(bytes[3]) << 24);
}

void put_f32_array(std::ostream& out, const std::vector<float>& values) {
    for (float v : values) {
        std::uint32_t bits;
        std::memcpy(&bits, &v, 4);
        put_u32(out, bits);
    }
}

}  // namespace

void write_blob(const std::filesystem::path& path, const std::vector<BlobSection>& sections) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoError("cannot write " + path.string());
    }
    out.write(kMagic, 5);
    put_u32(out, static_cast<std::uint32_t>(sections.size()));
    for (const auto& s : sections) {
        put_u16(out, static_cast<std::uint16_t>(s.name.size()));
        out.write(s.name.data(), static_cast<std::streamsize>(s.name.size()));
        put_u32(out, static_cast<std::uint32_t>(s.shape.size()));
        for (int d : s.shape) {
            put_u32(out, static_cast<std::uint32_t>(d));
        }
    }
    for (const auto& s : sections) {
        if (s.data.size() != Tensor::element_count(s.shape)) {
            throw ShapeMismatch("section '" + s.name + "' data does not match its shape");
        }
        put_f32_array(out, s.data);
    }
    if (!out) {
        throw IoError("short write to " + path.string());
    }
}

std::vector<BlobSection> read_blob(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open " + path.string());
    }
    char magic[5];
    in.read(magic, 5);
    if (!in || std::memcmp(magic, kMagic, 5) != 0) {
        throw IoError(path.string() + " is not a CLIC1 blob");
    }
    const std::uint32_t count = get_u32(in);
    std::vector<BlobSection> sections(count);
    for (auto& s : sections) {
        const std::uint16_t name_len = get_u16(in);
        s.name.resize(name_len);
        in.read(s.name.data(), name_len);
        const std::uint32_t rank = get_u32(in);
        s.shape.resize(rank);
        for (auto& d : s.shape) {
            d = static_cast<int>(get_u32(in));
        }
    }
    for (auto& s : sections) {
        const std::size_t n = Tensor::element_count(s.shape);
        s.data.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            const std::uint32_t bits = get_u32(in);
            std::memcpy(&s.data[i], &bits, 4);
        }
    }
    if (!in) {
        throw IoError(path.string() + " is truncated");
    }
    return sections;
}

void save_encoder(const EncoderParams& params, const std::filesystem::path& path) {
    std::vector<BlobSection> sections;
    for (const auto& entry : encoder_layout()) {
        BlobSection s;
        s.name = entry.name;
        s.shape = entry.shape;
        s.data.reserve(entry.size);
        for (std::size_t i = 0; i < entry.size; ++i) {
            s.data.push_back(static_cast<float>(params.data[entry.offset + i]));
        }
        sections.push_back(std::move(s));
    }
    write_blob(path, sections);
}

EncoderParams load_encoder(const std::filesystem::path& path) {
    const auto sections = read_blob(path);
    const auto& layout = encoder_layout();
    if (sections.size() != layout.size()) {
        throw ShapeMismatch(path.string() + " holds " + std::to_string(sections.size()) +
                            " sections, expected " + std::to_string(layout.size()));
    }
    EncoderParams params = EncoderParams::zeros();
    for (std::size_t i = 0; i < layout.size(); ++i) {
        if (sections[i].name != layout[i].name || sections[i].shape != layout[i].shape) {
            throw ShapeMismatch("section '" + sections[i].name + "' does not match layout '" +
                                layout[i].name + "'");
        }
        for (std::size_t j = 0; j < layout[i].size; ++j) {
            params.data[layout[i].offset + j] = static_cast<double>(sections[i].data[j]);
        }
    }
    return params;
}

}  // namespace clic
