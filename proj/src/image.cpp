#include "poserefine/image.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <csetjmp>
#include <cstdio>
#include <memory>
#include <stdexcept>

#include "poserefine/errors.hpp"

namespace poserefine {

ImageU8 ImageU8::filled(int width, int height, uint8_t r, uint8_t g,
                        uint8_t b) {
    ImageU8 img;
    img.width = width;
    img.height = height;
    img.rgb.resize(static_cast<size_t>(width) * height * 3);
    for (size_t i = 0; i < img.rgb.size(); i += 3) {
        img.rgb[i] = r;
        img.rgb[i + 1] = g;
        img.rgb[i + 2] = b;
    }
    return img;
}

BoundingBox BoundingBox::clamped(int w, int h) const {
    BoundingBox c;
    c.x_min = std::clamp(x_min, 0, w);
    c.y_min = std::clamp(y_min, 0, h);
    c.x_max = std::clamp(x_max, 0, w);
    c.y_max = std::clamp(y_max, 0, h);
    return c;
}

namespace {

struct FileCloser {
    void operator()(std::FILE* f) const {
        if (f) std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

}  // namespace

void write_png(const std::string& path, const ImageU8& img) {
    if (img.width <= 0 || img.height <= 0 ||
        img.rgb.size() != static_cast<size_t>(img.width) * img.height * 3) {
        throw std::invalid_argument("write_png: inconsistent image buffer");
    }
    FilePtr fp(std::fopen(path.c_str(), "wb"));
    if (!fp) throw DataError("write_png: cannot open '" + path + "'");

    png_structp png =
        png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png) throw DataError("write_png: png_create_write_struct failed");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_write_struct(&png, nullptr);
        throw DataError("write_png: png_create_info_struct failed");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw DataError("write_png: libpng error writing '" + path + "'");
    }
    png_init_io(png, fp.get());
    png_set_IHDR(png, info, static_cast<png_uint_32>(img.width),
                 static_cast<png_uint_32>(img.height), 8, PNG_COLOR_TYPE_RGB,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
                 PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    for (int y = 0; y < img.height; ++y) {
        png_write_row(png, const_cast<png_bytep>(img.pixel(0, y)));
    }
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
}

ImageU8 read_png(const std::string& path) {
    FilePtr fp(std::fopen(path.c_str(), "rb"));
    if (!fp) throw DataError("read_png: cannot open '" + path + "'");

    png_structp png =
        png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png) throw DataError("read_png: png_create_read_struct failed");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_read_struct(&png, nullptr, nullptr);
        throw DataError("read_png: png_create_info_struct failed");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw DataError("read_png: '" + path + "' is not a valid PNG");
    }
    png_init_io(png, fp.get());
    png_read_info(png, info);

    // Normalize everything to 8-bit RGB.
    png_set_strip_16(png);
    png_set_palette_to_rgb(png);
    png_set_expand_gray_1_2_4_to_8(png);
    if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
    png_set_strip_alpha(png);
    if (png_get_color_type(png, info) == PNG_COLOR_TYPE_GRAY ||
        png_get_color_type(png, info) == PNG_COLOR_TYPE_GRAY_ALPHA) {
        png_set_gray_to_rgb(png);
    }
    png_read_update_info(png, info);

    ImageU8 img;
    img.width = static_cast<int>(png_get_image_width(png, info));
    img.height = static_cast<int>(png_get_image_height(png, info));
    img.rgb.resize(static_cast<size_t>(img.width) * img.height * 3);
    if (png_get_rowbytes(png, info) !=
        static_cast<size_t>(img.width) * 3) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw DataError("read_png: unexpected row size in '" + path + "'");
    }
    for (int y = 0; y < img.height; ++y) {
        png_read_row(png, img.pixel(0, y), nullptr);
    }
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);
    return img;
}

Tensor crop_resize(const ImageU8& img, const BoundingBox& bbox, int out_size) {
    if (out_size <= 0) {
        throw std::invalid_argument("crop_resize: out_size must be positive");
    }
    const BoundingBox c = bbox.clamped(img.width, img.height);
    if (!c.valid()) {
        throw std::invalid_argument(
            "crop_resize: bbox [" + std::to_string(bbox.x_min) + "," +
            std::to_string(bbox.y_min) + "," + std::to_string(bbox.x_max) +
            "," + std::to_string(bbox.y_max) + ") is empty within a " +
            std::to_string(img.width) + "x" + std::to_string(img.height) +
            " image");
    }
    const int cw = c.width(), ch = c.height();
    const double sx = static_cast<double>(cw) / out_size;
    const double sy = static_cast<double>(ch) / out_size;

    Tensor t({3, out_size, out_size});
    const int64_t plane = static_cast<int64_t>(out_size) * out_size;
    for (int oy = 0; oy < out_size; ++oy) {
        // Pixel-center aligned sampling, clamped at crop edges.
        const double fy = std::clamp((oy + 0.5) * sy - 0.5, 0.0,
                                     static_cast<double>(ch - 1));
        const int y0 = static_cast<int>(fy);
        const int y1 = std::min(y0 + 1, ch - 1);
        const double wy = fy - y0;
        for (int ox = 0; ox < out_size; ++ox) {
            const double fx = std::clamp((ox + 0.5) * sx - 0.5, 0.0,
                                         static_cast<double>(cw - 1));
            const int x0 = static_cast<int>(fx);
            const int x1 = std::min(x0 + 1, cw - 1);
            const double wx = fx - x0;
            const uint8_t* p00 = img.pixel(c.x_min + x0, c.y_min + y0);
            const uint8_t* p01 = img.pixel(c.x_min + x1, c.y_min + y0);
            const uint8_t* p10 = img.pixel(c.x_min + x0, c.y_min + y1);
            const uint8_t* p11 = img.pixel(c.x_min + x1, c.y_min + y1);
            for (int ch3 = 0; ch3 < 3; ++ch3) {
                const double top = p00[ch3] + (p01[ch3] - p00[ch3]) * wx;
                const double bot = p10[ch3] + (p11[ch3] - p10[ch3]) * wx;
                const double val = (top + (bot - top) * wy) / 255.0;
                t.v[static_cast<size_t>(ch3 * plane + oy * out_size + ox)] =
                    static_cast<float>(val);
            }
        }
    }
    return t;
}

}  // namespace poserefine
