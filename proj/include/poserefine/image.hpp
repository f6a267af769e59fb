#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "poserefine/tensor.hpp"

namespace poserefine {

/// 8-bit RGB image, row-major, interleaved channels.
struct ImageU8 {
    int width = 0;
    int height = 0;
    std::vector<uint8_t> rgb;  // height * width * 3

    static ImageU8 filled(int width, int height, uint8_t r, uint8_t g,
                          uint8_t b);
    uint8_t* pixel(int x, int y) { return rgb.data() + (y * width + x) * 3; }
    const uint8_t* pixel(int x, int y) const {
        return rgb.data() + (y * width + x) * 3;
    }
};

/// Axis-aligned pixel rectangle, half-open: [x_min, x_max) x [y_min, y_max).
struct BoundingBox {
    int x_min = 0, y_min = 0, x_max = 0, y_max = 0;

    int width() const { return x_max - x_min; }
    int height() const { return y_max - y_min; }
    bool valid() const { return x_min < x_max && y_min < y_max; }

    /// Intersection with [0,w) x [0,h).
    BoundingBox clamped(int w, int h) const;
};

void write_png(const std::string& path, const ImageU8& img);
ImageU8 read_png(const std::string& path);  // throws DataError

/// Crops `bbox` (clamped to the image; an empty intersection is an error)
/// and bilinearly resizes to out_size x out_size. Returns a {3, out, out}
/// tensor with values in [0, 1], channels R, G, B.
Tensor crop_resize(const ImageU8& img, const BoundingBox& bbox, int out_size);

}  // namespace poserefine
