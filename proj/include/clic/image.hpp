#pragma once

#include <cstddef>
#include <vector>

namespace clic {

/// Dense pixel grid, row-major and channel-interleaved, intensities in
/// [0, 1]. One conversion happens at the decode boundary; everything
/// downstream is format-free floating point.
struct Image {
    int width = 0;
    int height = 0;
    int channels = 0;  // 1 or 3
    std::vector<float> pixels;

    Image() = default;
    Image(int w, int h, int c, float fill = 0.0f)
        : width(w), height(h), channels(c),
          pixels(static_cast<std::size_t>(w) * h * c, fill) {}

    float& at(int x, int y, int c) {
        return pixels[(static_cast<std::size_t>(y) * width + x) * channels + c];
    }
    float at(int x, int y, int c) const {
        return pixels[(static_cast<std::size_t>(y) * width + x) * channels + c];
    }

    std::size_t pixel_count() const { return static_cast<std::size_t>(width) * height; }
    bool empty() const { return pixels.empty(); }
};

/// Single-channel view-free grayscale image, same conventions as Image.
struct GrayImage {
    int width = 0;
    int height = 0;
    std::vector<float> pixels;

    GrayImage() = default;
    GrayImage(int w, int h, float fill = 0.0f)
        : width(w), height(h), pixels(static_cast<std::size_t>(w) * h, fill) {}

    float& at(int x, int y) { return pixels[static_cast<std::size_t>(y) * width + x]; }
    float at(int x, int y) const { return pixels[static_cast<std::size_t>(y) * width + x]; }

    bool empty() const { return pixels.empty(); }
};

/// Axis-aligned square crop window. Crops are always square because the
/// multi-scale crop plan works in single side lengths.
struct Rect {
    int x = 0;     // left
    int y = 0;     // top
    int side = 0;  // >= 1

    bool fits(int image_width, int image_height) const {
        return x >= 0 && y >= 0 && side >= 1 && x + side <= image_width &&
               y + side <= image_height;
    }
};

/// Rec. 601 luma (0.299 R + 0.587 G + 0.114 B); 1-channel input passes
/// through unchanged.
GrayImage to_grayscale(const Image& img);

/// Copies the square sub-grid described by `r`. Throws OutOfBounds when the
/// rect does not fit.
Image crop(const Image& img, const Rect& r);

/// Bilinear resize with corner-aligned sampling (output corners sample input
/// corners exactly). Output intensities stay inside [0, 1].
Image resize(const Image& img, int w, int h);

/// Replicates a grayscale image into a 3-channel Image.
Image gray_to_rgb(const GrayImage& img);

}  // namespace clic
