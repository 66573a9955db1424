#include "corebank/testbed.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <nlohmann/json.hpp>

#include "bytes.hpp"
#include "corebank/error.hpp"
#include "corebank/rng.hpp"

namespace corebank {

namespace {

// Workpiece geometry, in pixels relative to the slot center.
constexpr double kShapeRadius = 20.0;
constexpr double kSquareHalf = 18.0;
constexpr double kTriangleBase = 16.0;
constexpr double kCrossHalfWidth = 6.0;
constexpr double kRingInner = 10.0;
// Orientation marker: a darker dot above the center, so that a 180° turn is
// visible on every shape.
constexpr double kMarkerOffset = -13.0;
constexpr double kMarkerRadius = 3.0;
constexpr int kMarkerDarkening = 60;

constexpr int kScratchIntensity = 250;
constexpr int kBlobIntensity = 30;

bool inside_shape(Shape shape, double dx, double dy) {
    const double r2 = dx * dx + dy * dy;
    switch (shape) {
        case Shape::Empty: return false;
        case Shape::Circle: return r2 <= kShapeRadius * kShapeRadius;
        case Shape::Square: return std::abs(dx) <= kSquareHalf && std::abs(dy) <= kSquareHalf;
        case Shape::Triangle:
            return dy >= -kShapeRadius && dy <= kTriangleBase &&
                   std::abs(dx) <= kShapeRadius * (dy + kShapeRadius) / (kTriangleBase + kShapeRadius);
        case Shape::Cross:
            return (std::abs(dx) <= kCrossHalfWidth && std::abs(dy) <= kShapeRadius) ||
                   (std::abs(dy) <= kCrossHalfWidth && std::abs(dx) <= kShapeRadius);
        case Shape::Ring:
            return r2 >= kRingInner * kRingInner && r2 <= kShapeRadius * kShapeRadius;
    }
    return false;
}

struct SlotFrame {
    const SlotConfig& slot;
    double cx;
    double cy;

    // Offsets of pixel (x, y) in the workpiece's own frame. Pixel centers sit
    // at +0.5 so that a half turn maps the pixel grid onto itself.
    std::pair<double, double> local(int x, int y) const {
        double dx = x + 0.5 - cx;
        double dy = y + 0.5 - cy;
        if (slot.rotated) {
            dx = -dx;
            dy = -dy;
        }
        return {dx, dy};
    }

    bool footprint(int x, int y) const {
        const auto [dx, dy] = local(x, y);
        return inside_shape(slot.shape, dx, dy);
    }
};

SlotFrame frame_of(const SceneConfig& cfg, int slot) {
    return {cfg.slots[slot], static_cast<double>(SceneConfig::slot_center_x(slot)),
            static_cast<double>(SceneConfig::slot_center_y())};
}

constexpr int kHalfExtent = 21;

template <typename F>
void for_slot_pixels(int slot, F&& f) {
    const int cx = SceneConfig::slot_center_x(slot);
    const int cy = SceneConfig::slot_center_y();
    for (int y = std::max(0, cy - kHalfExtent); y < std::min(SceneConfig::kHeight, cy + kHalfExtent); ++y)
        for (int x = std::max(0, cx - kHalfExtent); x < std::min(SceneConfig::kWidth, cx + kHalfExtent); ++x)
            f(x, y);
}

using Canvas = std::vector<int>;

int& px(Canvas& c, int x, int y) { return c[static_cast<std::size_t>(y) * SceneConfig::kWidth + x]; }

void draw_workpieces(const SceneConfig& cfg, Canvas& canvas) {
    for (int s = 0; s < SceneConfig::kSlots; ++s) {
        const SlotFrame f = frame_of(cfg, s);
        if (f.slot.shape == Shape::Empty) continue;
        const int intensity = shape_intensity(f.slot.shape);
        for_slot_pixels(s, [&](int x, int y) {
            const auto [dx, dy] = f.local(x, y);
            if (!inside_shape(f.slot.shape, dx, dy)) return;
            const double my = dy - kMarkerOffset;
            const bool marker = dx * dx + my * my <= kMarkerRadius * kMarkerRadius;
            px(canvas, x, y) = marker ? intensity - kMarkerDarkening : intensity;
        });
    }
}

void draw_defect(const SceneConfig& cfg, const DefectSpec& d, Canvas& canvas) {
    if (d.slot < 0 || d.slot >= SceneConfig::kSlots)
        throw InvalidInput("defect slot " + std::to_string(d.slot) + " out of range");
    const SlotFrame f = frame_of(cfg, d.slot);
    if (f.slot.shape == Shape::Empty)
        throw InvalidInput("defect placed on empty slot " + std::to_string(d.slot));

    SplitMix64 rng(d.seed);
    const int cx = SceneConfig::slot_center_x(d.slot);
    const int cy = SceneConfig::slot_center_y();
    // Anchor: a pixel on the workpiece.
    int ax = cx;
    int ay = cy;
    for (int attempt = 0;; ++attempt) {
        ax = cx + static_cast<int>(rng.range(-kHalfExtent, kHalfExtent - 1));
        ay = cy + static_cast<int>(rng.range(-kHalfExtent, kHalfExtent - 1));
        if (f.footprint(ax, ay)) break;
        if (attempt > 10000) throw InvalidInput("could not place defect on workpiece");
    }

    switch (d.kind) {
        case DefectKind::Blob: {
            const int r = static_cast<int>(rng.range(2, 5));
            for (int y = std::max(0, ay - r); y <= std::min(SceneConfig::kHeight - 1, ay + r); ++y)
                for (int x = std::max(0, ax - r); x <= std::min(SceneConfig::kWidth - 1, ax + r); ++x)
                    if ((x - ax) * (x - ax) + (y - ay) * (y - ay) <= r * r) px(canvas, x, y) = kBlobIntensity;
            break;
        }
        case DefectKind::Scratch: {
            const double theta = rng.uniform() * std::numbers::pi;
            const double half_len = static_cast<double>(rng.range(8, 18));
            const double half_width = rng.range(1, 2) / 2.0;
            const double ux = std::cos(theta);
            const double uy = std::sin(theta);
            for_slot_pixels(d.slot, [&](int x, int y) {
                if (!f.footprint(x, y)) return;
                const double rx = x - ax;
                const double ry = y - ay;
                const double t = std::clamp(rx * ux + ry * uy, -half_len, half_len);
                const double ex = rx - t * ux;
                const double ey = ry - t * uy;
                if (ex * ex + ey * ey <= half_width * half_width) px(canvas, x, y) = kScratchIntensity;
            });
            break;
        }
        case DefectKind::MissingChunk: {
            const double start = rng.uniform() * 2.0 * std::numbers::pi;
            const double span = std::numbers::pi / 6.0 + rng.uniform() * std::numbers::pi / 6.0;
            for_slot_pixels(d.slot, [&](int x, int y) {
                if (!f.footprint(x, y)) return;
                double a = std::atan2(y + 0.5 - f.cy, x + 0.5 - f.cx) - start;
                a = std::fmod(a, 2.0 * std::numbers::pi);
                if (a < 0) a += 2.0 * std::numbers::pi;
                if (a <= span) px(canvas, x, y) = SceneConfig::kBackground;
            });
            break;
        }
    }
}

}  // namespace

const char* to_string(Shape shape) {
    switch (shape) {
        case Shape::Empty: return "empty";
        case Shape::Circle: return "circle";
        case Shape::Square: return "square";
        case Shape::Triangle: return "triangle";
        case Shape::Cross: return "cross";
        case Shape::Ring: return "ring";
    }
    return "?";
}

const char* to_string(DefectKind kind) {
    switch (kind) {
        case DefectKind::Scratch: return "scratch";
        case DefectKind::Blob: return "blob";
        case DefectKind::MissingChunk: return "missing_chunk";
    }
    return "?";
}

int shape_intensity(Shape shape) {
    switch (shape) {
        case Shape::Empty: return SceneConfig::kBackground;
        case Shape::Circle: return 200;
        case Shape::Square: return 180;
        case Shape::Triangle: return 160;
        case Shape::Cross: return 140;
        case Shape::Ring: return 220;
    }
    throw InvalidInput("invalid shape id");
}

std::uint32_t SceneConfig::layout_code() const {
    std::uint32_t code = 0;
    for (int s = kSlots - 1; s >= 0; --s) {
        const auto shape = static_cast<std::uint32_t>(slots[s].shape);
        std::uint32_t digit = 0;
        if (shape != 0) digit = slots[s].rotated ? shape + 5 : shape;
        code = code * 11 + digit;
    }
    return code;
}

SceneConfig SceneConfig::from_layout_code(std::uint32_t code, std::uint64_t seed) {
    if (code >= kLayoutSpace) throw InvalidInput("layout code out of range");
    SceneConfig cfg;
    cfg.seed = seed;
    for (int s = 0; s < kSlots; ++s) {
        const std::uint32_t digit = code % 11;
        code /= 11;
        if (digit == 0) continue;
        cfg.slots[s].shape = static_cast<Shape>(digit > 5 ? digit - 5 : digit);
        cfg.slots[s].rotated = digit > 5;
    }
    return cfg;
}

bool SceneConfig::has_rotation() const {
    return std::any_of(slots.begin(), slots.end(),
                       [](const SlotConfig& s) { return s.shape != Shape::Empty && s.rotated; });
}

bool SceneConfig::has_shape() const {
    return std::any_of(slots.begin(), slots.end(),
                       [](const SlotConfig& s) { return s.shape != Shape::Empty; });
}

std::string SceneConfig::describe() const {
    std::string out;
    for (int s = 0; s < kSlots; ++s) {
        if (s) out += ' ';
        out += to_string(slots[s].shape);
        if (slots[s].shape != Shape::Empty && slots[s].rotated) out += "@180";
    }
    return out;
}

RenderedScene render_scene(const SceneConfig& cfg, const std::vector<DefectSpec>& defects) {
    for (const auto& slot : cfg.slots)
        if (static_cast<std::uint8_t>(slot.shape) > static_cast<std::uint8_t>(Shape::Ring))
            throw InvalidInput("invalid shape id " + std::to_string(static_cast<int>(slot.shape)));

    const std::size_t n = static_cast<std::size_t>(SceneConfig::kWidth) * SceneConfig::kHeight;
    Canvas clean(n, SceneConfig::kBackground);
    draw_workpieces(cfg, clean);
    Canvas damaged = clean;
    for (const auto& d : defects) draw_defect(cfg, d, damaged);

    RenderedScene out{Image(SceneConfig::kWidth, SceneConfig::kHeight, 1),
                      Image(SceneConfig::kWidth, SceneConfig::kHeight, 1)};
    SplitMix64 noise(cfg.seed);
    for (std::size_t i = 0; i < n; ++i) {
        const int jitter = static_cast<int>(
            noise.range(-SceneConfig::kNoiseAmplitude, SceneConfig::kNoiseAmplitude));
        out.image.pixels[i] = static_cast<std::uint8_t>(std::clamp(damaged[i] + jitter, 0, 255));
        out.mask.pixels[i] = damaged[i] != clean[i] ? 255 : 0;
    }
    return out;
}

Image render_normal(const SceneConfig& cfg) { return render_scene(cfg, {}).image; }

std::vector<SceneConfig> enumerate_variants(std::size_t n, std::uint64_t seed,
                                            const LayoutFilter& filter) {
    std::vector<std::uint32_t> codes;
    codes.reserve(kLayoutSpace);
    for (std::uint32_t c = 0; c < kLayoutSpace; ++c)
        if (!filter || filter(SceneConfig::from_layout_code(c, 0))) codes.push_back(c);
    if (n > codes.size())
        throw InvalidInput("requested " + std::to_string(n) + " variants but only " +
                           std::to_string(codes.size()) + " distinct layouts exist");

    SplitMix64 rng(seed);
    std::vector<SceneConfig> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t j = i + static_cast<std::size_t>(rng.below(codes.size() - i));
        std::swap(codes[i], codes[j]);
        out.push_back(SceneConfig::from_layout_code(codes[i], derive_seed(seed, codes[i])));
    }
    return out;
}

std::vector<LabeledImage> make_eval_set(const std::vector<SceneConfig>& variants,
                                        std::size_t defects_per_variant, std::uint64_t seed) {
    if (defects_per_variant < 1) throw InvalidInput("defects_per_variant must be >= 1");
    std::vector<LabeledImage> out;
    out.reserve(variants.size() * (1 + defects_per_variant));
    for (std::size_t v = 0; v < variants.size(); ++v) {
        std::vector<int> occupied;
        for (int s = 0; s < SceneConfig::kSlots; ++s)
            if (variants[v].slots[s].shape != Shape::Empty) occupied.push_back(s);
        if (occupied.empty())
            throw InvalidInput("variant " + std::to_string(v) + " has no workpiece to damage");

        SplitMix64 rng(derive_seed(seed, v));
        for (std::size_t j = 0; j <= defects_per_variant; ++j) {
            LabeledImage item;
            item.variant = v;
            item.defective = j > 0;
            item.config = variants[v];
            item.config.seed = rng.next();
            if (item.defective) {
                DefectSpec d;
                d.kind = static_cast<DefectKind>(rng.below(3));
                d.slot = occupied[rng.below(occupied.size())];
                d.seed = rng.next();
                item.defects.push_back(d);
                item.name = "v" + std::to_string(v) + "_defect" + std::to_string(j);
            } else {
                item.name = "v" + std::to_string(v) + "_good";
            }
            RenderedScene scene = render_scene(item.config, item.defects);
            item.image = std::move(scene.image);
            item.mask = std::move(scene.mask);
            out.push_back(std::move(item));
        }
    }
    return out;
}

namespace {

std::string numbered(const char* prefix, std::size_t i) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%s%04zu", prefix, i);
    return buf;
}

nlohmann::json layout_json(const SceneConfig& cfg) {
    nlohmann::json slots = nlohmann::json::array();
    for (const auto& s : cfg.slots) slots.push_back({{"shape", to_string(s.shape)}, {"rotated", s.rotated}});
    return {{"layout_code", cfg.layout_code()}, {"noise_seed", cfg.seed}, {"slots", slots}};
}

}  // namespace

void write_dataset(const DatasetLayout& layout, const std::filesystem::path& root) {
    namespace fs = std::filesystem;
    std::vector<SceneConfig> train;
    std::vector<SceneConfig> eval;
    if (layout.drift) {
        train = enumerate_variants(layout.train_variants, derive_seed(layout.seed, 1),
                                   [](const SceneConfig& c) { return c.has_shape() && !c.has_rotation(); });
        eval = enumerate_variants(layout.eval_variants, derive_seed(layout.seed, 2),
                                  [](const SceneConfig& c) { return c.has_rotation(); });
    } else {
        auto all = enumerate_variants(layout.train_variants + layout.eval_variants,
                                      derive_seed(layout.seed, 1),
                                      [](const SceneConfig& c) { return c.has_shape(); });
        train.assign(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(layout.train_variants));
        eval.assign(all.begin() + static_cast<std::ptrdiff_t>(layout.train_variants), all.end());
    }

    try {
        for (const char* dir : {"train/good", "test/good", "test/defect", "ground_truth/defect"})
            fs::create_directories(root / dir);
    } catch (const fs::filesystem_error& e) {
        throw IoError(e.what());
    }

    nlohmann::json files = nlohmann::json::array();
    for (std::size_t i = 0; i < train.size(); ++i) {
        const std::string rel = "train/good/" + numbered("train_", i) + ".png";
        write_png(render_normal(train[i]), root / rel);
        files.push_back({{"path", rel}, {"split", "train"}, {"label", "good"}, {"variant", i},
                         {"config", layout_json(train[i])}});
    }

    if (!eval.empty()) {
        const auto items = make_eval_set(eval, layout.defects_per_variant, derive_seed(layout.seed, 3));
        for (const auto& item : items) {
            const std::string stem = numbered("eval_", item.variant);
            nlohmann::json entry = {{"split", "test"}, {"variant", item.variant},
                                    {"config", layout_json(item.config)}};
            if (!item.defective) {
                const std::string rel = "test/good/" + stem + ".png";
                write_png(item.image, root / rel);
                entry["path"] = rel;
                entry["label"] = "good";
            } else {
                const std::string base = stem + "_" + item.name.substr(item.name.find("defect"));
                const std::string rel = "test/defect/" + base + ".png";
                const std::string mask_rel = "ground_truth/defect/" + base + "_mask.png";
                write_png(item.image, root / rel);
                write_png(item.mask, root / mask_rel);
                nlohmann::json defects = nlohmann::json::array();
                for (const auto& d : item.defects)
                    defects.push_back({{"kind", to_string(d.kind)}, {"slot", d.slot}, {"seed", d.seed}});
                entry["path"] = rel;
                entry["label"] = "defect";
                entry["mask"] = mask_rel;
                entry["defects"] = defects;
            }
            files.push_back(std::move(entry));
        }
    }

    nlohmann::json manifest = {
        {"generator", "corebank synthetic five-slot testbed"},
        {"seed", layout.seed},
        {"drift", layout.drift},
        {"train_variants", layout.train_variants},
        {"eval_variants", layout.eval_variants},
        {"defects_per_variant", layout.defects_per_variant},
        {"canvas", {{"width", SceneConfig::kWidth}, {"height", SceneConfig::kHeight},
                    {"background", SceneConfig::kBackground}}},
        {"files", files}};
    detail::write_file(root / "manifest.json", manifest.dump(2) + "\n");
}

}  // namespace corebank
