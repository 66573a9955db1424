#include "corebank/augment.hpp"

#include <algorithm>

#include "corebank/error.hpp"

namespace corebank {

void AugmentPolicy::validate() const {
    if (enabled && ops.empty()) throw InvalidInput("enabled augmentation policy has no ops");
}

const char* to_string(AugmentOp op) {
    switch (op) {
        case AugmentOp::Sharpen: return "sharpen";
        case AugmentOp::Blur: return "blur";
    }
    return "?";
}

AugmentOp parse_augment_op(const std::string& name) {
    if (name == "sharpen") return AugmentOp::Sharpen;
    if (name == "blur") return AugmentOp::Blur;
    throw InvalidInput("unknown augmentation op '" + name + "'");
}

namespace {

// 3×3 integer-weight filter with replicate padding; finish() maps the
// weighted sum to the output intensity.
template <typename Finish>
Image filter3x3(const Image& image, const int (&k)[3][3], Finish finish) {
    validate(image);
    Image out(image.width, image.height, image.channels);
    const int w = image.width;
    const int h = image.height;
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            for (int c = 0; c < image.channels; ++c) {
                int sum = 0;
                for (int dy = -1; dy <= 1; ++dy) {
                    const int yy = std::clamp(y + dy, 0, h - 1);
                    for (int dx = -1; dx <= 1; ++dx) {
                        const int xx = std::clamp(x + dx, 0, w - 1);
                        sum += k[dy + 1][dx + 1] * image.at(xx, yy, c);
                    }
                }
                out.at(x, y, c) = finish(sum);
            }
        }
    }
    return out;
}

constexpr int kSharpen[3][3] = {{0, -1, 0}, {-1, 5, -1}, {0, -1, 0}};
constexpr int kBox[3][3] = {{1, 1, 1}, {1, 1, 1}, {1, 1, 1}};

}  // namespace

Image sharpen(const Image& image) {
    return filter3x3(image, kSharpen,
                     [](int s) { return static_cast<std::uint8_t>(std::clamp(s, 0, 255)); });
}

Image blur(const Image& image) {
    // floor(s/9 + 1/2) in integers.
    return filter3x3(image, kBox, [](int s) { return static_cast<std::uint8_t>((2 * s + 9) / 18); });
}

Image apply(AugmentOp op, const Image& image) {
    switch (op) {
        case AugmentOp::Sharpen: return sharpen(image);
        case AugmentOp::Blur: return blur(image);
    }
    throw InvalidInput("unknown augmentation op");
}

std::vector<Image> expand(const Image& image, const AugmentPolicy& policy) {
    validate(image);
    policy.validate();
    std::vector<Image> out{image};
    if (!policy.enabled) return out;
    for (AugmentOp op : policy.ops) out.push_back(apply(op, image));
    return out;
}

}  // namespace corebank
