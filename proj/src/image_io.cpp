#include "clic/image_io.hpp"

#include <cmath>
#include <fstream>

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>

#include "clic/error.hpp"

namespace clic {

namespace {

std::uint8_t to_u8(float v) {
    const float scaled = v * 255.0f;
    const long r = std::lroundf(scaled);
    return static_cast<std::uint8_t>(std::min(255L, std::max(0L, r)));
}

}  // namespace

Image decode_image(const std::vector<std::uint8_t>& bytes) {
    if (bytes.empty()) {
        throw DecodeError("empty byte stream");
    }
    cv::Mat raw(1, static_cast<int>(bytes.size()), CV_8UC1,
                const_cast<std::uint8_t*>(bytes.data()));
    cv::Mat decoded = cv::imdecode(raw, cv::IMREAD_UNCHANGED);
    if (decoded.empty()) {
        throw DecodeError("corrupt or unsupported image stream");
    }
    const int channels = decoded.channels() == 1 ? 1 : 3;
    Image out(decoded.cols, decoded.rows, channels);
    for (int y = 0; y < decoded.rows; ++y) {
        for (int x = 0; x < decoded.cols; ++x) {
            if (decoded.channels() == 1) {
                out.at(x, y, 0) = decoded.at<std::uint8_t>(y, x) / 255.0f;
            } else if (decoded.channels() == 3) {
                const auto px = decoded.at<cv::Vec3b>(y, x);  // BGR
                out.at(x, y, 0) = px[2] / 255.0f;
                out.at(x, y, 1) = px[1] / 255.0f;
                out.at(x, y, 2) = px[0] / 255.0f;
            } else if (decoded.channels() == 4) {
                const auto px = decoded.at<cv::Vec4b>(y, x);  // BGRA, alpha dropped
                out.at(x, y, 0) = px[2] / 255.0f;
                out.at(x, y, 1) = px[1] / 255.0f;
                out.at(x, y, 2) = px[0] / 255.0f;
            } else {
                throw DecodeError("unsupported channel count " +
                                  std::to_string(decoded.channels()));
            }
        }
    }
    return out;
}

Image load_image(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open " + path.string());
    }
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());
    return decode_image(bytes);
}

std::vector<std::uint8_t> encode_png(const Image& img) {
    cv::Mat mat(img.height, img.width, img.channels == 1 ? CV_8UC1 : CV_8UC3);
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x) {
            if (img.channels == 1) {
                mat.at<std::uint8_t>(y, x) = to_u8(img.at(x, y, 0));
            } else {
                mat.at<cv::Vec3b>(y, x) = cv::Vec3b(to_u8(img.at(x, y, 2)),
                                                    to_u8(img.at(x, y, 1)),
                                                    to_u8(img.at(x, y, 0)));
            }
        }
    }
    std::vector<std::uint8_t> bytes;
    if (!cv::imencode(".png", mat, bytes)) {
        throw IoError("PNG encoding failed");
    }
    return bytes;
}

void write_png(const Image& img, const std::filesystem::path& path) {
    const auto bytes = encode_png(img);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoError("cannot write " + path.string());
    }
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out) {
        throw IoError("short write to " + path.string());
    }
}

}  // namespace clic
