#include "corebank/scoring.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <nlohmann/json.hpp>

#include "bytes.hpp"
#include "corebank/error.hpp"
#include "corebank/parallel.hpp"

namespace corebank {

const char* to_string(ScoreMode mode) { return mode == ScoreMode::Max ? "max" : "mean"; }

ScoreMode parse_score_mode(const std::string& name) {
    if (name == "max") return ScoreMode::Max;
    if (name == "mean") return ScoreMode::Mean;
    throw InvalidInput("unknown score mode '" + name + "'");
}

PatchScores patch_scores(const EmbeddingSet& query, const MemoryBank& bank) {
    if (bank.empty()) throw EmptyBank();
    if (query.dim() != bank.dim()) throw DimMismatch(bank.dim(), query.dim());
    PatchScores out{query.rows(), query.cols(), std::vector<double>(query.size())};
    parallel_for(query.size(), [&](std::size_t i) {
        out.scores[i] = nearest_neighbor(query.at(i), bank).distance;
    });
    return out;
}

int nearest_cell(int x, int cells, const ExtractorConfig& cfg) {
    // Cell c is centered at c·stride + (patch_size − 1)/2; round half down.
    const double t = (x - (cfg.patch_size - 1) / 2.0) / cfg.stride;
    const int c = static_cast<int>(std::ceil(t - 0.5));
    return std::clamp(c, 0, cells - 1);
}

namespace {

std::vector<double> gaussian_kernel(double sigma) {
    const int radius = static_cast<int>(std::ceil(3.0 * sigma));
    std::vector<double> k(2 * radius + 1);
    for (int i = -radius; i <= radius; ++i) k[i + radius] = std::exp(-(i * i) / (2.0 * sigma * sigma));
    const double sum = std::accumulate(k.begin(), k.end(), 0.0);
    for (auto& v : k) v /= sum;
    return k;
}

}  // namespace

AnomalyMap to_anomaly_map(const PatchScores& scores, int image_width, int image_height,
                          const ExtractorConfig& cfg, double smooth_sigma) {
    cfg.validate();
    if (!(smooth_sigma >= 0.0)) throw InvalidInput("smooth_sigma must be >= 0");
    if (image_width < cfg.patch_size || image_height < cfg.patch_size)
        throw InvalidInput("image smaller than patch_size");
    if (scores.rows != cfg.grid_rows(image_height) || scores.cols != cfg.grid_cols(image_width) ||
        scores.scores.size() != static_cast<std::size_t>(scores.rows) * scores.cols)
        throw InvalidInput("patch score grid does not match image size and extractor config");

    const int w = image_width;
    const int h = image_height;
    std::vector<int> col_of(w), row_of(h);
    for (int x = 0; x < w; ++x) col_of[x] = nearest_cell(x, scores.cols, cfg);
    for (int y = 0; y < h; ++y) row_of[y] = nearest_cell(y, scores.rows, cfg);

    std::vector<double> up(static_cast<std::size_t>(w) * h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) up[static_cast<std::size_t>(y) * w + x] = scores.at(row_of[y], col_of[x]);

    if (smooth_sigma > 0.0) {
        const auto k = gaussian_kernel(smooth_sigma);
        const int r = static_cast<int>(k.size() / 2);
        std::vector<double> tmp(up.size());
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) {
                double s = 0.0;
                for (int i = -r; i <= r; ++i)
                    s += k[i + r] * up[static_cast<std::size_t>(y) * w + std::clamp(x + i, 0, w - 1)];
                tmp[static_cast<std::size_t>(y) * w + x] = s;
            }
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) {
                double s = 0.0;
                for (int i = -r; i <= r; ++i)
                    s += k[i + r] * tmp[static_cast<std::size_t>(std::clamp(y + i, 0, h - 1)) * w + x];
                up[static_cast<std::size_t>(y) * w + x] = s;
            }
    }

    AnomalyMap map{w, h, std::vector<float>(up.size())};
    std::transform(up.begin(), up.end(), map.values.begin(),
                   [](double v) { return static_cast<float>(v); });
    return map;
}

double image_score(const PatchScores& scores, ScoreMode mode) {
    if (scores.scores.empty()) throw InvalidInput("image score of an empty grid");
    if (mode == ScoreMode::Max) return *std::max_element(scores.scores.begin(), scores.scores.end());
    return std::accumulate(scores.scores.begin(), scores.scores.end(), 0.0) /
           static_cast<double>(scores.scores.size());
}

void write_anomaly_map_png(const AnomalyMap& map, const std::filesystem::path& png_path,
                           const std::filesystem::path& sidecar_path) {
    if (map.values.empty()) throw InvalidInput("empty anomaly map");
    const auto [lo_it, hi_it] = std::minmax_element(map.values.begin(), map.values.end());
    const double lo = *lo_it;
    const double hi = *hi_it;
    const double span = hi - lo;
    std::vector<std::uint16_t> gray(map.values.size());
    for (std::size_t i = 0; i < gray.size(); ++i) {
        const double t = span > 0.0 ? (map.values[i] - lo) / span : 0.0;
        gray[i] = static_cast<std::uint16_t>(std::lround(t * 65535.0));
    }
    write_png16(map.width, map.height, gray, png_path);

    nlohmann::json sidecar = {{"width", map.width},
                              {"height", map.height},
                              {"min", lo},
                              {"max", hi},
                              {"encoding", "value = min + pixel / 65535 * (max - min)"}};
    detail::write_file(sidecar_path, sidecar.dump(2) + "\n");
}

void write_anomaly_map_raw(const AnomalyMap& map, const std::filesystem::path& path,
                           const std::string& source_id) {
    const EmbeddingSet record(map.height, map.width, 1, map.values, source_id);
    save_embeddings(std::span<const EmbeddingSet>(&record, 1), path);
}

}  // namespace corebank
