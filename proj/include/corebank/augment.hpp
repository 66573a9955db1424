#pragma once

#include <vector>

#include "corebank/image.hpp"

namespace corebank {

enum class AugmentOp { Sharpen, Blur };

struct AugmentPolicy {
    std::vector<AugmentOp> ops;
    bool enabled = false;

    void validate() const;
    // Number of images expand() yields.
    std::size_t variant_count() const { return enabled ? 1 + ops.size() : 1; }
};

const char* to_string(AugmentOp op);
AugmentOp parse_augment_op(const std::string& name);

// 3×3 [[0,-1,0],[-1,5,-1],[0,-1,0]], replicate padding, clamped per channel.
Image sharpen(const Image& image);

// 3×3 box filter, replicate padding, round half up per channel.
Image blur(const Image& image);

Image apply(AugmentOp op, const Image& image);

// [original] followed by one variant per op when the policy is enabled.
std::vector<Image> expand(const Image& image, const AugmentPolicy& policy);

}  // namespace corebank
