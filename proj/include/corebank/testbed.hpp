#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "corebank/image.hpp"

namespace corebank {

enum class Shape : std::uint8_t { Empty, Circle, Square, Triangle, Cross, Ring };

const char* to_string(Shape shape);

struct SlotConfig {
    Shape shape = Shape::Empty;
    bool rotated = false;

    friend bool operator==(const SlotConfig&, const SlotConfig&) = default;
};

struct SceneConfig {
    static constexpr int kSlots = 5;
    static constexpr int kWidth = 320;
    static constexpr int kHeight = 96;
    static constexpr int kBackground = 64;
    static constexpr int kSlotPitch = 64;
    static constexpr int kNoiseAmplitude = 3;

    std::array<SlotConfig, kSlots> slots{};
    std::uint64_t seed = 0;

    static int slot_center_x(int slot) { return kSlotPitch / 2 + slot * kSlotPitch; }
    static int slot_center_y() { return kHeight / 2; }

    // Layout identity ignoring the noise seed. Empty slots are encoded as
    // unrotated since a rotated empty slot renders identically.
    std::uint32_t layout_code() const;
    static SceneConfig from_layout_code(std::uint32_t code, std::uint64_t seed);
    bool has_rotation() const;
    bool has_shape() const;
    std::string describe() const;
};

// Number of distinct rendered layouts: 11 appearances per slot.
inline constexpr std::uint32_t kLayoutSpace = 11 * 11 * 11 * 11 * 11;

int shape_intensity(Shape shape);

enum class DefectKind : std::uint8_t { Scratch, Blob, MissingChunk };

const char* to_string(DefectKind kind);

struct DefectSpec {
    DefectKind kind = DefectKind::Blob;
    int slot = 0;
    std::uint64_t seed = 0;
};

struct RenderedScene {
    Image image;
    Image mask;  // 1 channel, 255 where a defect altered the pixel
};

RenderedScene render_scene(const SceneConfig& cfg, const std::vector<DefectSpec>& defects);

using LayoutFilter = std::function<bool(const SceneConfig&)>;

// n pairwise-distinct layouts drawn by a seeded partial shuffle of the layout
// space (optionally restricted by filter). Each config gets its own noise seed.
std::vector<SceneConfig> enumerate_variants(std::size_t n, std::uint64_t seed,
                                            const LayoutFilter& filter = {});

struct LabeledImage {
    std::string name;
    std::size_t variant = 0;
    bool defective = false;
    Image image;
    Image mask;  // empty (all zero) for normal images
    SceneConfig config;
    std::vector<DefectSpec> defects;
};

// One normal image plus defects_per_variant defective images per variant.
std::vector<LabeledImage> make_eval_set(const std::vector<SceneConfig>& variants,
                                        std::size_t defects_per_variant, std::uint64_t seed);

// Normal training image for a variant, rendered with the config's own seed.
Image render_normal(const SceneConfig& cfg);

struct DatasetLayout {
    std::size_t train_variants = 0;
    std::size_t eval_variants = 0;
    std::size_t defects_per_variant = 3;
    std::uint64_t seed = 0;
    // Train layouts without rotations, eval layouts with at least one.
    bool drift = true;
};

// <root>/train/good, <root>/test/good, <root>/test/defect,
// <root>/ground_truth/defect and <root>/manifest.json.
void write_dataset(const DatasetLayout& layout, const std::filesystem::path& root);

}  // namespace corebank
