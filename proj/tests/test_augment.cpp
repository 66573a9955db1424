#include <doctest.h>

#include <cmath>

#include "corebank/augment.hpp"
#include "corebank/error.hpp"
#include "corebank/rng.hpp"
#include "oracles.hpp"

using namespace corebank;

namespace {

const std::vector<std::vector<double>> kSharpen{{0, -1, 0}, {-1, 5, -1}, {0, -1, 0}};
const std::vector<std::vector<double>> kBox(3, std::vector<double>(3, 1.0 / 9.0));

std::vector<double> channel(const Image& img, int c) {
    std::vector<double> out;
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x) out.push_back(img.at(x, y, c));
    return out;
}

Image random_image(int w, int h, int c, std::uint64_t seed) {
    Image img(w, h, c);
    SplitMix64 rng(seed);
    for (auto& p : img.pixels) p = static_cast<std::uint8_t>(rng.below(256));
    return img;
}

}  // namespace

TEST_CASE("constant images are fixed points") {
    for (int v : {0, 77, 255}) {
        const Image img(13, 9, 3, static_cast<std::uint8_t>(v));
        CHECK(sharpen(img) == img);
        CHECK(blur(img) == img);
    }
}

TEST_CASE("sharpen single bright pixel clamps") {
    Image img(5, 5, 1, 0);
    img.at(2, 2) = 255;
    const Image out = sharpen(img);
    CHECK(out.at(2, 2) == 255);
    CHECK(out.at(1, 2) == 0);
    CHECK(out.at(3, 2) == 0);
    CHECK(out.at(2, 1) == 0);
    CHECK(out.at(2, 3) == 0);
}

TEST_CASE("sharpen matches direct convolution on a ramp and on noise") {
    Image ramp(32, 16, 1);
    for (int y = 0; y < 16; ++y)
        for (int x = 0; x < 32; ++x) ramp.at(x, y) = static_cast<std::uint8_t>(x * 8 + y);
    for (const Image& img : {ramp, random_image(17, 11, 3, 4)}) {
        const Image out = sharpen(img);
        for (int c = 0; c < img.channels; ++c) {
            const auto ref = oracle::convolve2d(channel(img, c), img.width, img.height, kSharpen);
            const auto got = channel(out, c);
            for (std::size_t i = 0; i < ref.size(); ++i)
                CHECK(std::abs(got[i] - std::clamp(ref[i], 0.0, 255.0)) <= 1.0);
        }
    }
}

TEST_CASE("blur of a single 9 gives a 3x3 block of ones") {
    Image img(7, 7, 1, 0);
    img.at(3, 3) = 9;
    const Image out = blur(img);
    for (int y = 0; y < 7; ++y)
        for (int x = 0; x < 7; ++x) {
            const bool inside = std::abs(x - 3) <= 1 && std::abs(y - 3) <= 1;
            CHECK(out.at(x, y) == (inside ? 1 : 0));
        }
}

TEST_CASE("blur matches direct convolution exactly") {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const Image img = random_image(15, 12, seed % 2 ? 3 : 1, seed);
        const Image out = blur(img);
        for (int c = 0; c < img.channels; ++c) {
            const auto ref = oracle::convolve2d(channel(img, c), img.width, img.height, kBox);
            const auto got = channel(out, c);
            for (std::size_t i = 0; i < ref.size(); ++i) CHECK(got[i] == std::floor(ref[i] + 0.5));
        }
    }
}

TEST_CASE("filters keep shape") {
    const Image img = random_image(9, 4, 3, 1);
    for (AugmentOp op : {AugmentOp::Sharpen, AugmentOp::Blur}) {
        const Image out = apply(op, img);
        CHECK(out.width == 9);
        CHECK(out.height == 4);
        CHECK(out.channels == 3);
    }
}

TEST_CASE("expand cardinality and order") {
    const Image img = random_image(8, 8, 1, 2);
    AugmentPolicy both{{AugmentOp::Sharpen, AugmentOp::Blur}, true};
    const auto three = expand(img, both);
    REQUIRE(three.size() == 3);
    CHECK(both.variant_count() == 3);
    CHECK(three[0] == img);
    CHECK(three[1] == sharpen(img));
    CHECK(three[2] == blur(img));

    AugmentPolicy off{{AugmentOp::Sharpen, AugmentOp::Blur}, false};
    CHECK(expand(img, off).size() == 1);

    const Image flat(8, 8, 1, 40);
    const auto two = expand(flat, AugmentPolicy{{AugmentOp::Blur}, true});
    REQUIRE(two.size() == 2);
    CHECK(two[0] == two[1]);
}

TEST_CASE("op names round trip") {
    CHECK(parse_augment_op("sharpen") == AugmentOp::Sharpen);
    CHECK(parse_augment_op(to_string(AugmentOp::Blur)) == AugmentOp::Blur);
    CHECK_THROWS_AS(parse_augment_op("rotate"), InvalidInput);
}
