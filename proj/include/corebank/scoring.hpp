#pragma once

#include <cstddef>
#include <filesystem>
#include <vector>

#include "corebank/features.hpp"
#include "corebank/memory_bank.hpp"

namespace corebank {

struct PatchScores {
    int rows = 0;
    int cols = 0;
    std::vector<double> scores;  // row-major

    double at(int r, int c) const { return scores[static_cast<std::size_t>(r) * cols + c]; }
};

struct AnomalyMap {
    int width = 0;
    int height = 0;
    std::vector<float> values;  // row-major

    float at(int x, int y) const { return values[static_cast<std::size_t>(y) * width + x]; }
};

enum class ScoreMode { Max, Mean };

const char* to_string(ScoreMode mode);
ScoreMode parse_score_mode(const std::string& name);

PatchScores patch_scores(const EmbeddingSet& query, const MemoryBank& bank);

// Grid column (or row) whose patch center is closest to pixel coordinate x;
// ties go to the lower cell.
int nearest_cell(int x, int cells, const ExtractorConfig& cfg);

// Nearest-patch-center upsampling, optionally followed by a Gaussian of
// smooth_sigma pixels (radius ceil(3σ), replicate padding).
AnomalyMap to_anomaly_map(const PatchScores& scores, int image_width, int image_height,
                          const ExtractorConfig& cfg, double smooth_sigma);

double image_score(const PatchScores& scores, ScoreMode mode);

// 16-bit grayscale PNG, linearly scaled from [min, max] to [0, 65535], plus a
// JSON sidecar recording the scale.
void write_anomaly_map_png(const AnomalyMap& map, const std::filesystem::path& png_path,
                           const std::filesystem::path& sidecar_path);

// Raw float map as a single CGEM record (dim 1, rows = height, cols = width).
void write_anomaly_map_raw(const AnomalyMap& map, const std::filesystem::path& path,
                           const std::string& source_id);

}  // namespace corebank
