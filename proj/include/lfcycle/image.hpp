#pragma once

#include <algorithm>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace lfcycle {

/// RGB image, row-major, values in [0,1] at module boundaries.
struct Image {
    int height = 0;
    int width = 0;
    std::vector<float> data; // (y * width + x) * 3 + c

    Image() = default;
    Image(int h, int w) : height(h), width(w), data(static_cast<size_t>(h) * w * 3, 0.0f) {
        if (h < 1 || w < 1)
            throw std::invalid_argument("Image: extents must be >= 1, got " + std::to_string(h) +
                                        "x" + std::to_string(w));
    }

    float& at(int y, int x, int c) { return data[(static_cast<size_t>(y) * width + x) * 3 + c]; }
    float at(int y, int x, int c) const {
        return data[(static_cast<size_t>(y) * width + x) * 3 + c];
    }

    bool same_size(const Image& o) const { return height == o.height && width == o.width; }

    void clamp01() {
        for (auto& v : data) v = std::clamp(v, 0.0f, 1.0f);
    }
};

/// Mean absolute difference over the region excluding `margin` pixels on
/// every border.
double mean_abs_diff(const Image& a, const Image& b, int margin = 0);

/// Center crop helper used for margin-cropped comparisons.
Image crop_image(const Image& img, int y0, int x0, int h, int w);

bool image_bits_equal(const Image& a, const Image& b);

} // namespace lfcycle
