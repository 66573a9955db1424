#include "corebank/image.hpp"

#include <png.h>

#include <cstdio>
#include <memory>
#include <string>

#include "corebank/error.hpp"

namespace corebank {

void validate(const Image& image) {
    if (image.width <= 0 || image.height <= 0)
        throw InvalidInput("image has non-positive dimensions");
    if (image.channels != 1 && image.channels != 3)
        throw InvalidInput("image must have 1 or 3 channels, got " +
                           std::to_string(image.channels));
    if (image.pixels.empty()) throw InvalidInput("image pixel buffer is empty");
    const std::size_t expected =
        static_cast<std::size_t>(image.width) * image.height * image.channels;
    if (image.pixels.size() != expected)
        throw InvalidInput("pixel buffer length " + std::to_string(image.pixels.size()) +
                           " does not match " + std::to_string(expected));
}

std::vector<double> luminance(const Image& image) {
    const std::size_t n = static_cast<std::size_t>(image.width) * image.height;
    std::vector<double> lum(n);
    if (image.channels == 1) {
        for (std::size_t i = 0; i < n; ++i) lum[i] = image.pixels[i] / 255.0;
    } else {
        for (std::size_t i = 0; i < n; ++i) {
            const std::uint8_t* p = &image.pixels[i * 3];
            lum[i] = (0.299 * p[0] + 0.587 * p[1] + 0.114 * p[2]) / 255.0;
        }
    }
    return lum;
}

namespace {

struct FileCloser {
    void operator()(std::FILE* f) const { std::fclose(f); }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

FilePtr open_file(const std::filesystem::path& path, const char* mode) {
    FilePtr f(std::fopen(path.string().c_str(), mode));
    if (!f) throw IoError("cannot open " + path.string());
    return f;
}

[[noreturn]] void png_error_fn(png_structp png, png_const_charp msg) {
    auto* what = static_cast<std::string*>(png_get_error_ptr(png));
    if (what) *what = msg;
    png_longjmp(png, 1);
}

void png_warning_fn(png_structp, png_const_charp) {}

// Writes rows of `bit_depth` gray/RGB data. row_bytes already accounts for
// depth and channels; 16-bit rows must be big-endian.
void write_png_rows(const std::filesystem::path& path, int width, int height, int color_type,
                    int bit_depth, const std::uint8_t* data, std::size_t row_bytes) {
    FilePtr file = open_file(path, "wb");
    std::string error;
    png_structp png =
        png_create_write_struct(PNG_LIBPNG_VER_STRING, &error, png_error_fn, png_warning_fn);
    if (!png) throw IoError("png_create_write_struct failed");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_write_struct(&png, nullptr);
        throw IoError("png_create_info_struct failed");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw IoError("writing " + path.string() + ": " + error);
    }
    png_init_io(png, file.get());
    png_set_IHDR(png, info, width, height, bit_depth, color_type, PNG_INTERLACE_NONE,
                 PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    for (int y = 0; y < height; ++y)
        png_write_row(png, const_cast<png_bytep>(data + static_cast<std::size_t>(y) * row_bytes));
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
}

}  // namespace

Image read_png(const std::filesystem::path& path) {
    FilePtr file = open_file(path, "rb");
    unsigned char sig[8];
    if (std::fread(sig, 1, 8, file.get()) != 8 || png_sig_cmp(sig, 0, 8) != 0)
        throw FormatError(path.string() + " is not a PNG file");

    std::string error;
    png_structp png =
        png_create_read_struct(PNG_LIBPNG_VER_STRING, &error, png_error_fn, png_warning_fn);
    if (!png) throw IoError("png_create_read_struct failed");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_read_struct(&png, nullptr, nullptr);
        throw IoError("png_create_info_struct failed");
    }

    Image image;
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw FormatError("reading " + path.string() + ": " + error);
    }
    png_init_io(png, file.get());
    png_set_sig_bytes(png, 8);
    png_read_info(png, info);

    const int color_type = png_get_color_type(png, info);
    const int bit_depth = png_get_bit_depth(png, info);
    if (bit_depth == 16) png_set_strip_16(png);
    if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
    if (color_type == PNG_COLOR_TYPE_GRAY && bit_depth < 8) png_set_expand_gray_1_2_4_to_8(png);
    if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
    png_set_strip_alpha(png);
    png_read_update_info(png, info);

    image.width = static_cast<int>(png_get_image_width(png, info));
    image.height = static_cast<int>(png_get_image_height(png, info));
    image.channels = png_get_channels(png, info);
    if (image.channels != 1 && image.channels != 3) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw FormatError(path.string() + ": unsupported channel count");
    }
    const std::size_t row_bytes = png_get_rowbytes(png, info);
    image.pixels.resize(row_bytes * image.height);
    std::vector<png_bytep> rows(image.height);
    for (int y = 0; y < image.height; ++y) rows[y] = image.pixels.data() + y * row_bytes;
    png_read_image(png, rows.data());
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);
    return image;
}

void write_png(const Image& image, const std::filesystem::path& path) {
    validate(image);
    const int color = image.channels == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB;
    write_png_rows(path, image.width, image.height, color, 8, image.pixels.data(),
                   static_cast<std::size_t>(image.width) * image.channels);
}

void write_png16(int width, int height, const std::vector<std::uint16_t>& gray,
                 const std::filesystem::path& path) {
    if (width <= 0 || height <= 0 || gray.size() != static_cast<std::size_t>(width) * height)
        throw InvalidInput("16-bit image buffer does not match its dimensions");
    std::vector<std::uint8_t> be(gray.size() * 2);
    for (std::size_t i = 0; i < gray.size(); ++i) {
        be[2 * i] = static_cast<std::uint8_t>(gray[i] >> 8);
        be[2 * i + 1] = static_cast<std::uint8_t>(gray[i] & 0xFF);
    }
    write_png_rows(path, width, height, PNG_COLOR_TYPE_GRAY, 16, be.data(),
                   static_cast<std::size_t>(width) * 2);
}

}  // namespace corebank
