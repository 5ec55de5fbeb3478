#include "clic/image.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "clic/error.hpp"

namespace clic {

GrayImage to_grayscale(const Image& img) {
    GrayImage out(img.width, img.height);
    if (img.channels == 1) {
        out.pixels.assign(img.pixels.begin(), img.pixels.end());
        return out;
    }
    const float* src = img.pixels.data();
    for (std::size_t i = 0; i < out.pixels.size(); ++i) {
        const float* p = src + i * 3;
        out.pixels[i] = 0.299f * p[0] + 0.587f * p[1] + 0.114f * p[2];
    }
    return out;
}

Image gray_to_rgb(const GrayImage& img) {
    Image out(img.width, img.height, 3);
    for (std::size_t i = 0; i < img.pixels.size(); ++i) {
        out.pixels[i * 3 + 0] = img.pixels[i];
        out.pixels[i * 3 + 1] = img.pixels[i];
        out.pixels[i * 3 + 2] = img.pixels[i];
    }
    return out;
}

Image crop(const Image& img, const Rect& r) {
    if (!r.fits(img.width, img.height)) {
        throw OutOfBounds("crop rect (" + std::to_string(r.x) + "," + std::to_string(r.y) +
                          ")+" + std::to_string(r.side) + " exceeds " +
                          std::to_string(img.width) + "x" + std::to_string(img.height));
    }
    Image out(r.side, r.side, img.channels);
    const std::size_t row_bytes = static_cast<std::size_t>(r.side) * img.channels;
    for (int y = 0; y < r.side; ++y) {
        const float* src = &img.pixels[(static_cast<std::size_t>(r.y + y) * img.width + r.x) *
                                       img.channels];
        std::copy(src, src + row_bytes, &out.pixels[static_cast<std::size_t>(y) * row_bytes]);
    }
    return out;
}

Image resize(const Image& img, int w, int h) {
    if (w < 1 || h < 1) {
        throw OutOfBounds("resize target must be at least 1x1");
    }
    if (w == img.width && h == img.height) {
        return img;
    }
    Image out(w, h, img.channels);
    // Corner-aligned sampling: output index i maps to i * (in - 1) / (out - 1);
    // a single output pixel samples the first input pixel.
    const double sx = (w > 1) ? static_cast<double>(img.width - 1) / (w - 1) : 0.0;
    const double sy = (h > 1) ? static_cast<double>(img.height - 1) / (h - 1) : 0.0;
    for (int y = 0; y < h; ++y) {
        const double fy = y * sy;
        int y0 = static_cast<int>(fy);
        y0 = std::min(y0, img.height - 1);
        const int y1 = std::min(y0 + 1, img.height - 1);
        const double wy = fy - y0;
        for (int x = 0; x < w; ++x) {
            const double fx = x * sx;
            int x0 = static_cast<int>(fx);
            x0 = std::min(x0, img.width - 1);
            const int x1 = std::min(x0 + 1, img.width - 1);
            const double wx = fx - x0;
            for (int c = 0; c < img.channels; ++c) {
                const double top = (1.0 - wx) * img.at(x0, y0, c) + wx * img.at(x1, y0, c);
                const double bot = (1.0 - wx) * img.at(x0, y1, c) + wx * img.at(x1, y1, c);
                const double v = (1.0 - wy) * top + wy * bot;
                out.at(x, y, c) = static_cast<float>(std::clamp(v, 0.0, 1.0));
            }
        }
    }
    return out;
}

}  // namespace clic
