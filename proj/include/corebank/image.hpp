#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <vector>

namespace corebank {

// Row-major, interleaved 8-bit image with 1 (gray) or 3 (RGB) channels.
struct Image {
    int width = 0;
    int height = 0;
    int channels = 1;
    std::vector<std::uint8_t> pixels;

    Image() = default;
    Image(int w, int h, int c, std::uint8_t fill = 0)
        : width(w), height(h), channels(c),
          pixels(static_cast<std::size_t>(w) * h * c, fill) {}

    std::uint8_t& at(int x, int y, int c = 0) {
        return pixels[(static_cast<std::size_t>(y) * width + x) * channels + c];
    }
    std::uint8_t at(int x, int y, int c = 0) const {
        return pixels[(static_cast<std::size_t>(y) * width + x) * channels + c];
    }

    std::size_t byte_size() const { return pixels.size(); }

    friend bool operator==(const Image&, const Image&) = default;
};

// Throws InvalidInput unless dims are positive, channels is 1 or 3 and the
// buffer length matches.
void validate(const Image& image);

// Luminance in [0,1] per pixel, row-major (0.299R + 0.587G + 0.114B).
std::vector<double> luminance(const Image& image);

// PNG I/O. Reading accepts 8-bit gray or RGB (alpha is stripped, 16-bit is
// reduced). Errors surface as IoError / FormatError.
Image read_png(const std::filesystem::path& path);
void write_png(const Image& image, const std::filesystem::path& path);
void write_png16(int width, int height, const std::vector<std::uint16_t>& gray,
                 const std::filesystem::path& path);

}  // namespace corebank
