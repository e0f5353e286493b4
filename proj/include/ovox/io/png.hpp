#pragma once

// PNG load/save through libpng. Images are float [0,1]; 8- and 16-bit
// files are accepted, palette/gray/alpha layouts are expanded.

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <memory>
#include <string>
#include <vector>

#include "../error.hpp"
#include "../texture.hpp"

namespace ovox::io {

namespace detail {

struct FileCloser {
    void operator()(std::FILE* f) const {
        if (f) std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

[[noreturn]] inline void png_error_fn(png_structp png, png_const_charp msg) {
    auto* out = static_cast<std::string*>(png_get_error_ptr(png));
    if (out) *out = msg;
    png_longjmp(png, 1);
}
inline void png_warning_fn(png_structp, png_const_charp) {}

}  // namespace detail

/// Reads a PNG into a float image with the file's channel count (1-4).
inline Image read_png(const std::string& path) {
    detail::FilePtr fp(std::fopen(path.c_str(), "rb"));
    if (!fp) throw IoError("cannot open " + path + " for reading");
    png_byte sig[8];
    if (std::fread(sig, 1, 8, fp.get()) != 8 || png_sig_cmp(sig, 0, 8) != 0) throw DataError(path + ": not a PNG file");
    std::string message;
    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, &message, detail::png_error_fn, detail::png_warning_fn);
    if (!png) throw IoError("libpng initialisation failed");
    png_infop info = png_create_info_struct(png);
    std::vector<png_byte> pixels;
    std::vector<png_bytep> rows;
    int width = 0, height = 0, channels = 0, depth = 8;
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw DataError(path + ": " + message);
    }
    png_init_io(png, fp.get());
    png_set_sig_bytes(png, 8);
    png_read_info(png, info);
    const png_byte color = png_get_color_type(png, info);
    if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
    if (color == PNG_COLOR_TYPE_GRAY && png_get_bit_depth(png, info) < 8) png_set_expand_gray_1_2_4_to_8(png);
    if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
    if (png_get_bit_depth(png, info) == 16) png_set_swap(png);
    png_read_update_info(png, info);
    width = int(png_get_image_width(png, info));
    height = int(png_get_image_height(png, info));
    channels = png_get_channels(png, info);
    depth = png_get_bit_depth(png, info);
    const std::size_t stride = png_get_rowbytes(png, info);
    pixels.resize(stride * std::size_t(height));
    rows.resize(std::size_t(height));
    for (int y = 0; y < height; ++y) rows[std::size_t(y)] = pixels.data() + stride * std::size_t(y);
    png_read_image(png, rows.data());
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);

    Image img(width, height, channels);
    const std::size_t count = std::size_t(width) * height * channels;
    if (depth == 16) {
        for (std::size_t i = 0; i < count; ++i) {
            std::uint16_t v;
            std::memcpy(&v, pixels.data() + 2 * i, 2);
            img.data[i] = float(v) / 65535.f;
        }
    } else {
        for (std::size_t i = 0; i < count; ++i) img.data[i] = float(pixels[i]) / 255.f;
    }
    return img;
}

/// Writes values clamped to [0,1], rounded to the nearest code.
inline void write_png(const Image& img, const std::string& path, int bit_depth = 8) {
    if (bit_depth != 8 && bit_depth != 16) throw InvalidArgument("PNG bit depth must be 8 or 16");
    if (img.width <= 0 || img.height <= 0) throw InvalidArgument("cannot write an empty image");
    static constexpr int kColor[5] = {0, PNG_COLOR_TYPE_GRAY, PNG_COLOR_TYPE_GRAY_ALPHA, PNG_COLOR_TYPE_RGB,
                                      PNG_COLOR_TYPE_RGBA};
    const int bytes = bit_depth / 8;
    const std::size_t stride = std::size_t(img.width) * img.channels * bytes;
    std::vector<png_byte> pixels(stride * std::size_t(img.height));
    const float max_code = bit_depth == 8 ? 255.f : 65535.f;
    for (std::size_t i = 0; i < img.data.size(); ++i) {
        const float v = std::clamp(img.data[i], 0.f, 1.f);
        const auto code = std::uint32_t(std::lround(v * max_code));
        if (bytes == 1) {
            pixels[i] = png_byte(code);
        } else {
            pixels[2 * i] = png_byte(code >> 8);  // PNG stores 16-bit samples big-endian
            pixels[2 * i + 1] = png_byte(code & 0xff);
        }
    }
    detail::FilePtr fp(std::fopen(path.c_str(), "wb"));
    if (!fp) throw IoError("cannot open " + path + " for writing");
    std::string message;
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, &message, detail::png_error_fn, detail::png_warning_fn);
    if (!png) throw IoError("libpng initialisation failed");
    png_infop info = png_create_info_struct(png);
    std::vector<png_bytep> rows(std::size_t(img.height));
    for (int y = 0; y < img.height; ++y) rows[std::size_t(y)] = pixels.data() + stride * std::size_t(y);
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw IoError(path + ": " + message);
    }
    png_init_io(png, fp.get());
    png_set_IHDR(png, info, png_uint_32(img.width), png_uint_32(img.height), bit_depth, kColor[img.channels],
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    png_write_image(png, rows.data());
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
}

}  // namespace ovox::io
