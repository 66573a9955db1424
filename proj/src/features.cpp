#include "corebank/features.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>

#include "bytes.hpp"
#include "corebank/error.hpp"

namespace corebank {

void ExtractorConfig::validate() const {
    if (patch_size < 2) throw InvalidInput("patch_size must be >= 2");
    if (stride < 1) throw InvalidInput("stride must be >= 1");
    if (neighborhood_radius < 0) throw InvalidInput("neighborhood_radius must be >= 0");
}

EmbeddingSet::EmbeddingSet(int rows, int cols, int dim, std::string source_id)
    : rows_(rows), cols_(cols), dim_(dim),
      data_(static_cast<std::size_t>(rows) * cols * dim, 0.0f),
      source_id_(std::move(source_id)) {}

EmbeddingSet::EmbeddingSet(int rows, int cols, int dim, std::vector<float> data,
                           std::string source_id)
    : rows_(rows), cols_(cols), dim_(dim), data_(std::move(data)),
      source_id_(std::move(source_id)) {
    if (data_.size() != static_cast<std::size_t>(rows) * cols * dim)
        throw InvalidInput("embedding buffer does not match rows*cols*dim");
}

PatchEmbedding EmbeddingSet::embedding(std::size_t flat) const {
    auto v = at(flat);
    return {std::vector<float>(v.begin(), v.end()), static_cast<int>(flat / cols_),
            static_cast<int>(flat % cols_)};
}

namespace {

// Start and end (exclusive) of thumbnail block b along a patch side. Every
// block covers at least one pixel, so patches narrower than the thumbnail
// reuse pixels.
std::pair<int, int> thumb_block(int b, int side) {
    const int begin = std::min(b * side / ExtractorConfig::kThumbSide, side - 1);
    const int end = std::max((b + 1) * side / ExtractorConfig::kThumbSide, begin + 1);
    return {begin, end};
}

}  // namespace

EmbeddingSet extract_raw_descriptors(const Image& image, const ExtractorConfig& cfg) {
    cfg.validate();
    validate(image);
    const int w = image.width;
    const int h = image.height;
    if (w < cfg.patch_size || h < cfg.patch_size)
        throw InvalidInput("image " + std::to_string(w) + "x" + std::to_string(h) +
                           " is smaller than patch_size " + std::to_string(cfg.patch_size));

    const int channels = image.channels;
    const int dim = ExtractorConfig::descriptor_dim(channels);
    const int rows = cfg.grid_rows(h);
    const int cols = cfg.grid_cols(w);
    const int P = cfg.patch_size;

    const std::vector<double> lum = luminance(image);
    auto L = [&](int x, int y) {
        x = std::clamp(x, 0, w - 1);
        y = std::clamp(y, 0, h - 1);
        return lum[static_cast<std::size_t>(y) * w + x];
    };
    // Central-difference gradient magnitude and orientation bin per pixel.
    std::vector<double> magnitude(lum.size());
    std::vector<int> bin(lum.size());
    constexpr double kPi = std::numbers::pi;
    constexpr int kBins = ExtractorConfig::kOrientationBins;
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const double gx = 0.5 * (L(x + 1, y) - L(x - 1, y));
            const double gy = 0.5 * (L(x, y + 1) - L(x, y - 1));
            const std::size_t i = static_cast<std::size_t>(y) * w + x;
            magnitude[i] = std::sqrt(gx * gx + gy * gy);
            double theta = std::atan2(gy, gx);
            if (theta < 0.0) theta += kPi;
            if (theta >= kPi) theta -= kPi;
            bin[i] = std::min(kBins - 1, static_cast<int>(theta / (kPi / kBins)));
        }
    }

    EmbeddingSet out(rows, cols, dim);
    std::vector<double> desc(dim);
    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) {
            const int x0 = c * cfg.stride;
            const int y0 = r * cfg.stride;
            std::fill(desc.begin(), desc.end(), 0.0);

            for (int ch = 0; ch < channels; ++ch) {
                // Integer moments keep constant patches at exactly zero spread.
                std::int64_t sum = 0;
                std::int64_t sum_sq = 0;
                for (int y = y0; y < y0 + P; ++y)
                    for (int x = x0; x < x0 + P; ++x) {
                        const std::int64_t v = image.at(x, y, ch);
                        sum += v;
                        sum_sq += v * v;
                    }
                const auto n = static_cast<std::int64_t>(P) * P;
                desc[ch] = static_cast<double>(sum) / (255.0 * static_cast<double>(n));
                const auto spread = static_cast<double>(n * sum_sq - sum * sum);
                desc[channels + ch] = std::sqrt(spread) / (255.0 * static_cast<double>(n));
            }

            double* hist = desc.data() + 2 * channels;
            double total = 0.0;
            for (int y = y0; y < y0 + P; ++y)
                for (int x = x0; x < x0 + P; ++x) {
                    const std::size_t i = static_cast<std::size_t>(y) * w + x;
                    hist[bin[i]] += magnitude[i];
                    total += magnitude[i];
                }
            if (total > 0.0)
                for (int b = 0; b < kBins; ++b) hist[b] /= total;

            double* thumb = hist + kBins;
            constexpr int T = ExtractorConfig::kThumbSide;
            for (int by = 0; by < T; ++by) {
                const auto [ya, yb] = thumb_block(by, P);
                for (int bx = 0; bx < T; ++bx) {
                    const auto [xa, xb] = thumb_block(bx, P);
                    double sum = 0.0;
                    for (int y = ya; y < yb; ++y)
                        for (int x = xa; x < xb; ++x) sum += L(x0 + x, y0 + y);
                    thumb[by * T + bx] = sum / ((yb - ya) * (xb - xa));
                }
            }

            auto cell = out.at(static_cast<std::size_t>(r) * cols + c);
            std::transform(desc.begin(), desc.end(), cell.begin(),
                           [](double v) { return static_cast<float>(v); });
        }
    }
    return out;
}

EmbeddingSet aggregate_neighborhood(const EmbeddingSet& raw, int radius) {
    if (radius < 0) throw InvalidInput("neighborhood_radius must be >= 0");
    if (radius == 0) return raw;
    const int rows = raw.rows();
    const int cols = raw.cols();
    const int dim = raw.dim();
    EmbeddingSet out(rows, cols, dim, raw.source_id());
    std::vector<double> acc(dim);
    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) {
            std::fill(acc.begin(), acc.end(), 0.0);
            int count = 0;
            for (int rr = std::max(0, r - radius); rr <= std::min(rows - 1, r + radius); ++rr)
                for (int cc = std::max(0, c - radius); cc <= std::min(cols - 1, c + radius); ++cc) {
                    auto v = raw.at(rr, cc);
                    for (int d = 0; d < dim; ++d) acc[d] += v[d];
                    ++count;
                }
            auto cell = out.at(static_cast<std::size_t>(r) * cols + c);
            for (int d = 0; d < dim; ++d) cell[d] = static_cast<float>(acc[d] / count);
        }
    }
    return out;
}

EmbeddingSet extract_patches(const Image& image, const ExtractorConfig& cfg) {
    return aggregate_neighborhood(extract_raw_descriptors(image, cfg), cfg.neighborhood_radius);
}

DescriptorExtractor::DescriptorExtractor(ExtractorConfig cfg) : cfg_(cfg) { cfg_.validate(); }

EmbeddingSet DescriptorExtractor::extract(const Image& image, std::string_view source_id) const {
    EmbeddingSet set = extract_patches(image, cfg_);
    set.set_source_id(std::string(source_id));
    return set;
}

PrecomputedExtractor::PrecomputedExtractor(std::vector<EmbeddingSet> sets)
    : sets_(std::move(sets)) {
    for (std::size_t i = 0; i < sets_.size(); ++i) by_id_.emplace(sets_[i].source_id(), i);
}

EmbeddingSet PrecomputedExtractor::extract(const Image&, std::string_view source_id) const {
    auto it = by_id_.find(std::string(source_id));
    if (it == by_id_.end())
        throw InvalidInput("no precomputed embeddings for '" + std::string(source_id) + "'");
    return sets_[it->second];
}

// --- CGEM -------------------------------------------------------------------

namespace {
constexpr std::string_view kEmbeddingMagic = "CGEM";
constexpr std::uint32_t kEmbeddingVersion = 1;
}  // namespace

std::string encode_embeddings(std::span<const EmbeddingSet> sets, int dim) {
    std::string out;
    out.append(kEmbeddingMagic);
    detail::put_le<std::uint32_t>(out, kEmbeddingVersion);
    detail::put_le<std::uint32_t>(out, static_cast<std::uint32_t>(dim));
    detail::put_le<std::uint32_t>(out, static_cast<std::uint32_t>(sets.size()));
    for (const auto& set : sets) {
        if (set.dim() != dim) throw DimMismatch(dim, set.dim());
        if (set.source_id().size() > 0xFFFF) throw InvalidInput("source id longer than 65535 bytes");
        detail::put_le<std::uint32_t>(out, static_cast<std::uint32_t>(set.rows()));
        detail::put_le<std::uint32_t>(out, static_cast<std::uint32_t>(set.cols()));
        detail::put_le<std::uint16_t>(out, static_cast<std::uint16_t>(set.source_id().size()));
        out.append(set.source_id());
        for (float v : set.data()) detail::put_f32(out, v);
    }
    return out;
}

std::vector<EmbeddingSet> decode_embeddings(std::string_view bytes) {
    detail::ByteReader in(bytes, "CGEM");
    if (in.remaining() < 4 || in.take(4) != kEmbeddingMagic)
        throw FormatError("CGEM: bad magic");
    const auto version = in.get<std::uint32_t>();
    if (version != kEmbeddingVersion)
        throw FormatError("CGEM: unsupported version " + std::to_string(version));
    const auto dim = in.get<std::uint32_t>();
    const auto count = in.get<std::uint32_t>();
    std::vector<EmbeddingSet> sets;
    sets.reserve(std::min<std::uint32_t>(count, 1024));
    for (std::uint32_t i = 0; i < count; ++i) {
        const auto rows = in.get<std::uint32_t>();
        const auto cols = in.get<std::uint32_t>();
        const auto id_len = in.get<std::uint16_t>();
        std::string id(in.take(id_len));
        const std::uint64_t n = static_cast<std::uint64_t>(rows) * cols * dim;
        if (n * 4 > in.remaining())
            throw FormatError("CGEM: truncated payload in record " + std::to_string(i));
        std::vector<float> data(n);
        for (auto& v : data) v = in.get_f32();
        sets.emplace_back(static_cast<int>(rows), static_cast<int>(cols), static_cast<int>(dim),
                          std::move(data), std::move(id));
    }
    if (in.remaining() != 0) throw FormatError("CGEM: trailing bytes after last record");
    return sets;
}

void save_embeddings(std::span<const EmbeddingSet> sets, const std::filesystem::path& path) {
    const int dim = sets.empty() ? 0 : sets.front().dim();
    detail::write_file(path, encode_embeddings(sets, dim));
}

std::vector<EmbeddingSet> load_precomputed(const std::filesystem::path& path) {
    return decode_embeddings(detail::read_file(path));
}

}  // namespace corebank
