#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "corebank/image.hpp"

namespace corebank {

struct ExtractorConfig {
    int patch_size = 8;
    int stride = 8;
    int neighborhood_radius = 1;

    // 2·channels (mean, std) + 8 orientation bins + 4×4 luminance thumbnail.
    static constexpr int kOrientationBins = 8;
    static constexpr int kThumbSide = 4;
    static int descriptor_dim(int channels) {
        return 2 * channels + kOrientationBins + kThumbSide * kThumbSide;
    }

    void validate() const;

    int grid_rows(int image_height) const { return (image_height - patch_size) / stride + 1; }
    int grid_cols(int image_width) const { return (image_width - patch_size) / stride + 1; }
};

// One patch descriptor, tied to its grid cell.
struct PatchEmbedding {
    std::vector<float> vector;
    int grid_row = 0;
    int grid_col = 0;
};

// Patch embeddings of one image on its grid. Stored as a single row-major
// buffer of rows·cols·dim floats; cell (r, c) lives at (r·cols + c)·dim.
class EmbeddingSet {
public:
    EmbeddingSet() = default;
    EmbeddingSet(int rows, int cols, int dim, std::string source_id = {});
    EmbeddingSet(int rows, int cols, int dim, std::vector<float> data, std::string source_id);

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    int dim() const { return dim_; }
    std::size_t size() const { return static_cast<std::size_t>(rows_) * cols_; }
    bool empty() const { return size() == 0; }

    const std::string& source_id() const { return source_id_; }
    void set_source_id(std::string id) { source_id_ = std::move(id); }

    std::span<const float> at(std::size_t flat) const {
        return {data_.data() + flat * dim_, static_cast<std::size_t>(dim_)};
    }
    std::span<float> at(std::size_t flat) {
        return {data_.data() + flat * dim_, static_cast<std::size_t>(dim_)};
    }
    std::span<const float> at(int row, int col) const {
        return at(static_cast<std::size_t>(row) * cols_ + col);
    }

    PatchEmbedding embedding(std::size_t flat) const;

    const std::vector<float>& data() const { return data_; }
    std::size_t byte_size() const { return data_.capacity() * sizeof(float); }

    friend bool operator==(const EmbeddingSet&, const EmbeddingSet&) = default;

private:
    int rows_ = 0;
    int cols_ = 0;
    int dim_ = 0;
    std::vector<float> data_;
    std::string source_id_;
};

// Descriptor of every grid cell before neighborhood averaging.
EmbeddingSet extract_raw_descriptors(const Image& image, const ExtractorConfig& cfg);

// Replaces each cell by the mean over its (2r+1)² neighborhood, clipped at the
// grid border. r = 0 returns the input unchanged.
EmbeddingSet aggregate_neighborhood(const EmbeddingSet& raw, int radius);

// Raw descriptors followed by neighborhood aggregation.
EmbeddingSet extract_patches(const Image& image, const ExtractorConfig& cfg);

// Common surface for the built-in descriptor and externally computed
// embeddings.
class Extractor {
public:
    virtual ~Extractor() = default;
    virtual EmbeddingSet extract(const Image& image, std::string_view source_id) const = 0;
};

class DescriptorExtractor final : public Extractor {
public:
    explicit DescriptorExtractor(ExtractorConfig cfg = {});
    EmbeddingSet extract(const Image& image, std::string_view source_id) const override;
    const ExtractorConfig& config() const { return cfg_; }

private:
    ExtractorConfig cfg_;
};

// Serves embeddings loaded from a CGEM file, looked up by source id. The image
// argument is ignored; an unknown id raises InvalidInput.
class PrecomputedExtractor final : public Extractor {
public:
    explicit PrecomputedExtractor(std::vector<EmbeddingSet> sets);
    EmbeddingSet extract(const Image& image, std::string_view source_id) const override;
    std::size_t size() const { return sets_.size(); }

private:
    std::vector<EmbeddingSet> sets_;
    std::unordered_map<std::string, std::size_t> by_id_;
};

// CGEM embedding files: "CGEM", u32 version = 1, u32 dim, u32 record_count,
// then per record u32 rows, u32 cols, u16 id length, id bytes, and
// rows·cols·dim little-endian float32 values.
void save_embeddings(std::span<const EmbeddingSet> sets, const std::filesystem::path& path);
std::vector<EmbeddingSet> load_precomputed(const std::filesystem::path& path);

std::string encode_embeddings(std::span<const EmbeddingSet> sets, int dim);
std::vector<EmbeddingSet> decode_embeddings(std::string_view bytes);

}  // namespace corebank
