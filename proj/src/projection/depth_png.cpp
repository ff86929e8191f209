#include "difreg/projection/depth_png.hpp"

#include <png.h>

#include <cmath>
#include <cstdio>
#include <memory>

#include "difreg/core/error.hpp"

namespace difreg {

DepthImage16 quantize_mm(const DepthMap& d) {
    DepthImage16 img{d.width(), d.height(), std::vector<std::uint16_t>(d.data().size(), 0)};
    for (std::size_t i = 0; i < d.data().size(); ++i) {
        const double z = d.data()[i];
        if (!(z > 0.0)) continue;
        const double mm = std::round(z * 1000.0);
        img.pixels[i] = static_cast<std::uint16_t>(std::clamp(mm, 1.0, 65535.0));
    }
    return img;
}

DepthMap dequantize_mm(const DepthImage16& img, const CameraIntrinsics& k, const RigidTransform& view_pose) {
    if (k.width != img.width || k.height != img.height)
        fail(ErrorCode::InvalidInput, "dequantize_mm: intrinsics do not match the image size");
    DepthMap d(k, view_pose);
    for (int v = 0; v < img.height; ++v)
        for (int u = 0; u < img.width; ++u)
            d.at(u, v) = img.pixels[static_cast<std::size_t>(v) * img.width + u] / 1000.0;
    return d;
}

namespace {

struct FileCloser {
    void operator()(std::FILE* f) const { std::fclose(f); }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

[[noreturn]] void png_error_fn(png_structp png, png_const_charp msg) {
    auto* message = static_cast<std::string*>(png_get_error_ptr(png));
    if (message) *message = msg;
    png_longjmp(png, 1);
}

void png_warning_fn(png_structp, png_const_charp) {}

}  // namespace

void write_depth_png(const std::filesystem::path& path, const DepthImage16& img) {
    if (img.width <= 0 || img.height <= 0 ||
        img.pixels.size() != static_cast<std::size_t>(img.width) * img.height)
        fail(ErrorCode::InvalidInput, "write_depth_png: inconsistent image");
    FilePtr file(std::fopen(path.string().c_str(), "wb"));
    if (!file) fail(ErrorCode::Io, "cannot open for writing: " + path.string());

    std::string message;
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, &message, png_error_fn, png_warning_fn);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        png_destroy_write_struct(&png, &info);
        fail(ErrorCode::Io, "libpng initialisation failed");
    }
    // Big-endian rows as PNG stores them; built before setjmp so no C++ objects straddle it.
    std::vector<png_byte> rows(img.pixels.size() * 2);
    for (std::size_t i = 0; i < img.pixels.size(); ++i) {
        rows[2 * i] = static_cast<png_byte>(img.pixels[i] >> 8);
        rows[2 * i + 1] = static_cast<png_byte>(img.pixels[i] & 0xff);
    }
    std::vector<png_bytep> row_ptrs(static_cast<std::size_t>(img.height));
    for (int v = 0; v < img.height; ++v) row_ptrs[v] = rows.data() + static_cast<std::size_t>(v) * img.width * 2;

    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        fail(ErrorCode::Io, "libpng write error: " + message);
    }
    png_init_io(png, file.get());
    png_set_IHDR(png, info, static_cast<png_uint_32>(img.width), static_cast<png_uint_32>(img.height), 16,
                 PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    png_write_image(png, row_ptrs.data());
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
}

DepthImage16 read_depth_png(const std::filesystem::path& path) {
    FilePtr file(std::fopen(path.string().c_str(), "rb"));
    if (!file) fail(ErrorCode::FileMissing, "cannot open depth PNG: " + path.string());

    png_byte sig[8] = {};
    if (std::fread(sig, 1, 8, file.get()) != 8 || png_sig_cmp(sig, 0, 8) != 0)
        fail(ErrorCode::Parse, "not a PNG file: " + path.string());

    std::string message;
    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, &message, png_error_fn, png_warning_fn);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        png_destroy_read_struct(&png, &info, nullptr);
        fail(ErrorCode::Io, "libpng initialisation failed");
    }
    DepthImage16 img;
    std::vector<png_byte> rows;
    std::vector<png_bytep> row_ptrs;

    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        fail(ErrorCode::Parse, "corrupt depth PNG " + path.string() + ": " + message);
    }
    png_init_io(png, file.get());
    png_set_sig_bytes(png, 8);
    png_read_info(png, info);
    if (png_get_bit_depth(png, info) != 16 || png_get_color_type(png, info) != PNG_COLOR_TYPE_GRAY ||
        png_get_interlace_type(png, info) != PNG_INTERLACE_NONE) {
        png_destroy_read_struct(&png, &info, nullptr);
        fail(ErrorCode::Parse, "depth PNG must be 16-bit grayscale, non-interlaced: " + path.string());
    } else {
        img.width = static_cast<int>(png_get_image_width(png, info));
        img.height = static_cast<int>(png_get_image_height(png, info));
        rows.resize(static_cast<std::size_t>(img.width) * img.height * 2);
        row_ptrs.resize(static_cast<std::size_t>(img.height));
        for (int v = 0; v < img.height; ++v)
            row_ptrs[v] = rows.data() + static_cast<std::size_t>(v) * img.width * 2;
        png_read_image(png, row_ptrs.data());
        png_read_end(png, nullptr);
    }
    png_destroy_read_struct(&png, &info, nullptr);

    img.pixels.resize(static_cast<std::size_t>(img.width) * img.height);
    for (std::size_t i = 0; i < img.pixels.size(); ++i)
        img.pixels[i] = static_cast<std::uint16_t>((rows[2 * i] << 8) | rows[2 * i + 1]);
    return img;
}

}  // namespace difreg
