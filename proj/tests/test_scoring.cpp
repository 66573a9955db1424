#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>

#include <nlohmann/json.hpp>

#include "corebank/error.hpp"
#include "corebank/rng.hpp"
#include "corebank/scoring.hpp"
#include "oracles.hpp"

using namespace corebank;

namespace {

EmbeddingSet random_set(int rows, int cols, int dim, SplitMix64& rng) {
    EmbeddingSet set(rows, cols, dim);
    for (std::size_t i = 0; i < set.size(); ++i)
        for (auto& v : set.at(i)) v = static_cast<float>(rng.uniform());
    return set;
}

MemoryBank random_bank(std::size_t n, int dim, SplitMix64& rng) {
    MemoryBank bank(dim);
    std::vector<float> v(dim);
    for (std::size_t i = 0; i < n; ++i) {
        for (auto& x : v) x = static_cast<float>(rng.uniform());
        bank.append(v, {"b", 0});
    }
    return bank;
}

// Nearest patch center by direct search, lower cell on ties.
int brute_cell(int x, int cells, const ExtractorConfig& cfg) {
    int best = 0;
    double best_d = 1e300;
    for (int c = 0; c < cells; ++c) {
        const double d = std::abs(x - (c * cfg.stride + (cfg.patch_size - 1) / 2.0));
        if (d < best_d) {
            best_d = d;
            best = c;
        }
    }
    return best;
}

std::vector<double> brute_upsample(const PatchScores& s, int w, int h, const ExtractorConfig& cfg) {
    std::vector<double> out(static_cast<std::size_t>(w) * h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            out[y * w + x] = s.at(brute_cell(y, s.rows, cfg), brute_cell(x, s.cols, cfg));
    return out;
}

}  // namespace

TEST_CASE("patch score examples") {
    MemoryBank bank(2);
    bank.append(std::vector<float>{0, 0}, {"b", 0});
    bank.append(std::vector<float>{1, 0}, {"b", 1});
    const PatchScores s = patch_scores(EmbeddingSet(1, 1, 2, {3, 0}, "q"), bank);
    REQUIRE(s.scores.size() == 1);
    CHECK(s.scores[0] == 2.0);
    CHECK_THROWS_AS(patch_scores(EmbeddingSet(1, 1, 2, {3, 0}, "q"), MemoryBank(2)), EmptyBank);
    CHECK_THROWS_AS(patch_scores(EmbeddingSet(1, 1, 3), bank), DimMismatch);
}

TEST_CASE("scores of appended embeddings are zero") {
    SplitMix64 rng(1);
    const EmbeddingSet q = random_set(4, 5, 6, rng);
    MemoryBank bank = random_bank(10, 6, rng);
    for (std::size_t i = 0; i < q.size(); ++i) bank.append(q.at(i), {"q", 0});
    for (double v : patch_scores(q, bank).scores) CHECK(v == 0.0);
}

TEST_CASE("patch scores match per-cell exhaustive scan") {
    SplitMix64 rng(2);
    const EmbeddingSet q = random_set(8, 8, 10, rng);
    const MemoryBank bank = random_bank(200, 10, rng);
    std::vector<oracle::Vec> ref;
    for (std::size_t i = 0; i < bank.size(); ++i) ref.emplace_back(bank.entry(i).begin(), bank.entry(i).end());
    const PatchScores s = patch_scores(q, bank);
    CHECK(s.rows == 8);
    CHECK(s.cols == 8);
    for (std::size_t i = 0; i < q.size(); ++i) {
        const auto nn = oracle::scan(oracle::Vec(q.at(i).begin(), q.at(i).end()), ref);
        CHECK(s.scores[i] == doctest::Approx(std::sqrt(nn.sq_distance)).epsilon(1e-12));
    }
}

TEST_CASE("nearest_cell agrees with direct search") {
    for (const ExtractorConfig cfg : {ExtractorConfig{8, 8, 1}, ExtractorConfig{8, 4, 1}, ExtractorConfig{5, 3, 0},
                                      ExtractorConfig{4, 6, 0}}) {
        for (int w : {cfg.patch_size, 23, 40}) {
            const int cells = cfg.grid_cols(w);
            for (int x = 0; x < w; ++x) CHECK(nearest_cell(x, cells, cfg) == brute_cell(x, cells, cfg));
        }
    }
}

TEST_CASE("uniform scores give a constant map") {
    const ExtractorConfig cfg{};
    const PatchScores s{4, 6, std::vector<double>(24, 0.37)};
    for (double sigma : {0.0, 1.5}) {
        const AnomalyMap m = to_anomaly_map(s, 48, 32, cfg, sigma);
        CHECK(m.width == 48);
        CHECK(m.height == 32);
        for (float v : m.values) CHECK(v == doctest::Approx(0.37f).epsilon(1e-6));
    }
}

TEST_CASE("single hot cell covers exactly its pixel assignment") {
    const ExtractorConfig cfg{8, 4, 1};
    const int w = 37, h = 29;
    PatchScores s{cfg.grid_rows(h), cfg.grid_cols(w), {}};
    s.scores.assign(static_cast<std::size_t>(s.rows) * s.cols, 0.0);
    s.scores[2 * s.cols + 3] = 1.0;
    const AnomalyMap m = to_anomaly_map(s, w, h, cfg, 0.0);
    const auto ref = brute_upsample(s, w, h, cfg);
    int hot = 0;
    for (std::size_t i = 0; i < ref.size(); ++i) {
        CHECK(m.values[i] == static_cast<float>(ref[i]));
        hot += ref[i] == 1.0;
    }
    CHECK(hot == 4 * 4);  // interior cell: stride × stride pixels
}

TEST_CASE("smoothed map matches 2-D Gaussian convolution") {
    const ExtractorConfig cfg{};
    const int w = 64, h = 48;
    PatchScores s{6, 8, std::vector<double>(48, 0.0)};
    s.scores[2 * 8 + 5] = 1.0;
    const AnomalyMap m = to_anomaly_map(s, w, h, cfg, 2.0);
    const auto ref = oracle::convolve2d(brute_upsample(s, w, h, cfg), w, h, oracle::gaussian2d(2.0));
    for (std::size_t i = 0; i < ref.size(); ++i) CHECK(std::abs(m.values[i] - ref[i]) <= 1e-5);

    const auto at = std::max_element(m.values.begin(), m.values.end()) - m.values.begin();
    const int x = static_cast<int>(at % w), y = static_cast<int>(at / w);
    CHECK(nearest_cell(x, 8, cfg) == 5);
    CHECK(nearest_cell(y, 6, cfg) == 2);
}

TEST_CASE("map shape mismatch is rejected") {
    const PatchScores s{2, 2, std::vector<double>(4, 0.0)};
    CHECK_THROWS_AS(to_anomaly_map(s, 32, 32, ExtractorConfig{}, 0.0), InvalidInput);
    CHECK_THROWS_AS(to_anomaly_map(s, 16, 16, ExtractorConfig{}, -1.0), InvalidInput);
    CHECK_NOTHROW(to_anomaly_map(s, 16, 16, ExtractorConfig{}, 0.0));
}

TEST_CASE("image score examples") {
    const PatchScores s{1, 3, {0.1, 0.5, 0.3}};
    CHECK(image_score(s, ScoreMode::Max) == 0.5);
    CHECK(image_score(s, ScoreMode::Mean) == doctest::Approx(0.3).epsilon(1e-15));
    const PatchScores z{2, 2, std::vector<double>(4, 0.0)};
    CHECK(image_score(z, ScoreMode::Max) == 0.0);
    CHECK(image_score(z, ScoreMode::Mean) == 0.0);
    CHECK_THROWS_AS(image_score(PatchScores{}, ScoreMode::Max), InvalidInput);
    CHECK(parse_score_mode("mean") == ScoreMode::Mean);
    CHECK_THROWS_AS(parse_score_mode("median"), InvalidInput);
}

TEST_CASE("map maximum equals patch score maximum at sigma 0") {
    SplitMix64 rng(4);
    const ExtractorConfig cfg{8, 8, 1};
    const EmbeddingSet q = random_set(5, 7, 4, rng);
    const MemoryBank bank = random_bank(30, 4, rng);
    const PatchScores s = patch_scores(q, bank);
    const AnomalyMap m = to_anomaly_map(s, 56, 40, cfg, 0.0);
    CHECK(*std::max_element(m.values.begin(), m.values.end()) == static_cast<float>(image_score(s, ScoreMode::Max)));
}

TEST_CASE("bank order does not change scores") {
    SplitMix64 rng(5);
    const EmbeddingSet q = random_set(4, 4, 5, rng);
    const MemoryBank bank = random_bank(50, 5, rng);
    MemoryBank reversed(5);
    for (std::size_t i = bank.size(); i-- > 0;) reversed.append(bank.entry(i), bank.provenance(i));
    CHECK(patch_scores(q, bank).scores == patch_scores(q, reversed).scores);
}

TEST_CASE("appending never raises any score") {
    const ExtractorConfig cfg{4, 4, 0};
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
        SplitMix64 rng(seed);
        const EmbeddingSet q = random_set(3, 4, 3, rng);
        MemoryBank bank = random_bank(5, 3, rng);
        const PatchScores before = patch_scores(q, bank);
        const AnomalyMap map_before = to_anomaly_map(before, 16, 12, cfg, 0.0);
        for (std::size_t i = 0; i < 5; ++i) {
            std::vector<float> v(3);
            for (auto& x : v) x = static_cast<float>(rng.uniform());
            bank.append(v, {"n", 1});
        }
        const PatchScores after = patch_scores(q, bank);
        const AnomalyMap map_after = to_anomaly_map(after, 16, 12, cfg, 0.0);
        for (std::size_t i = 0; i < after.scores.size(); ++i) CHECK(after.scores[i] <= before.scores[i]);
        for (std::size_t i = 0; i < map_after.values.size(); ++i) CHECK(map_after.values[i] <= map_before.values[i]);
        for (ScoreMode mode : {ScoreMode::Max, ScoreMode::Mean})
            CHECK(image_score(after, mode) <= image_score(before, mode));
    }
}

TEST_CASE("map export writes PNG, sidecar and raw record") {
    const auto dir = std::filesystem::temp_directory_path() / "corebank_test_maps";
    std::filesystem::create_directories(dir);
    const ExtractorConfig cfg{};
    const PatchScores s{2, 2, {0.0, 1.0, 2.0, 4.0}};
    const AnomalyMap m = to_anomaly_map(s, 16, 16, cfg, 0.0);
    write_anomaly_map_png(m, dir / "m.png", dir / "m.json");
    const Image png = read_png(dir / "m.png");
    CHECK(png.width == 16);
    CHECK(png.height == 16);
    std::ifstream in(dir / "m.json");
    const auto meta = nlohmann::json::parse(in);
    CHECK(meta["min"].get<double>() == 0.0);
    CHECK(meta["max"].get<double>() == 4.0);

    write_anomaly_map_raw(m, dir / "m.cgem", "m");
    const auto raw = load_precomputed(dir / "m.cgem");
    REQUIRE(raw.size() == 1);
    CHECK(raw[0].data() == m.values);
    CHECK(raw[0].rows() == 16);
}
