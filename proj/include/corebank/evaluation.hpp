#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "corebank/augment.hpp"
#include "corebank/features.hpp"
#include "corebank/memory_bank.hpp"
#include "corebank/scoring.hpp"
#include "corebank/testbed.hpp"

namespace corebank {

// Exact CGMB byte breakdown of a bank.
struct BankFootprint {
    std::size_t header_bytes = 0;
    std::size_t data_bytes = 0;
    std::size_t trailer_bytes = 0;
    std::size_t footer_bytes = 0;
    std::size_t total() const { return header_bytes + data_bytes + trailer_bytes + footer_bytes; }
};

BankFootprint measure_bank(const MemoryBank& bank);

struct LatencyStats {
    std::size_t reps = 0;
    double mean_seconds = 0.0;
    double p95_seconds = 0.0;  // nearest-rank
    double min_seconds = 0.0;
    double max_seconds = 0.0;
};

// Wall-clock timing of op over reps runs after `warmup` discarded runs.
LatencyStats benchmark(const std::function<void()>& op, std::size_t reps, std::size_t warmup = 3);

// Keeps the running min squared distance of every patch of a fixed set of
// query grids to a growing bank, so that scoring after an append only scans
// the new entries. Matches patch_scores() exactly at every point.
class IncrementalScorer {
public:
    explicit IncrementalScorer(std::vector<EmbeddingSet> queries);

    // Folds bank entries [seen, bank.size()) into the running minima.
    void update(const MemoryBank& bank);
    std::size_t seen() const { return seen_; }

    PatchScores scores(std::size_t query) const;
    double image_score(std::size_t query, ScoreMode mode) const;
    std::size_t query_count() const { return queries_.size(); }

private:
    std::vector<EmbeddingSet> queries_;
    std::vector<std::vector<double>> min_sq_;
    std::size_t seen_ = 0;
};

enum class ProtocolArm {
    LowerBound,
    UpperBound,
    Baseline,
    Incremental,
    IncrementalAugment,
    IncrementalAugmentLimited,
};

const char* to_string(ProtocolArm arm);
ProtocolArm parse_protocol_arm(const std::string& name);
std::vector<ProtocolArm> all_protocol_arms();

struct ProtocolOptions {
    std::size_t pretrain_variants = 20;
    std::size_t adapt_variants = 10;
    std::size_t eval_variants = 10;
    std::size_t defects_per_variant = 3;
    ExtractorConfig extractor;
    // Fraction of the pre-training patches kept by the offline coreset (and
    // by the batch upper bound).
    double coreset_ratio = 0.1;
    // Per-image feature budget of the online arms. The baseline's
    // subsampling ratio is chosen to append the same count per image.
    std::size_t max_new = 24;
    double min_distance = 0.0;
    std::vector<AugmentOp> augment_ops{AugmentOp::Sharpen, AugmentOp::Blur};
    ScoreMode mode = ScoreMode::Max;
    std::vector<ProtocolArm> arms = all_protocol_arms();
    bool pixel_metrics = true;

    void validate() const;
};

struct ModeMetrics {
    double auroc = 0.0;
    double aupr = 0.0;
};

struct CurvePoint {
    std::size_t samples_used = 0;
    ModeMetrics max;
    ModeMetrics mean;
};

struct ArmResult {
    ProtocolArm arm = ProtocolArm::LowerBound;
    // Final metrics under the options' primary mode.
    double auroc = 0.0;
    double aupr = 0.0;
    std::optional<double> pixel_auroc;
    std::vector<CurvePoint> curve;
    MemoryBank bank;
};

struct ProtocolRun {
    std::uint64_t seed = 0;
    std::vector<ArmResult> arms;

    const ArmResult& arm(ProtocolArm which) const;
};

// Runs every configured arm from the same pre-trained bank: the bank is built
// by offline coreset over `pretrain`, each online arm streams one normal image
// per `adapt` variant, and the fixed `eval` set is re-scored after every
// sample. Variant sets must not share a layout.
ProtocolRun run_protocol(const std::vector<SceneConfig>& pretrain,
                         const std::vector<SceneConfig>& adapt,
                         const std::vector<LabeledImage>& eval, const ProtocolOptions& options,
                         std::uint64_t seed);

// Generates the synthetic drift scenario for a seed (pre-training layouts
// without rotations, adaptation and evaluation layouts with at least one
// rotated workpiece) and runs the protocol on it.
ProtocolRun run_seeded_protocol(const ProtocolOptions& options, std::uint64_t seed);

struct ArmSummary {
    ProtocolArm arm = ProtocolArm::LowerBound;
    double auroc_mean = 0.0;
    double auroc_std = 0.0;
    double aupr_mean = 0.0;
    double aupr_std = 0.0;
    std::size_t runs = 0;
};

std::vector<ArmSummary> summarize(std::span<const ProtocolRun> runs);

// seed,arm,auroc,aupr,pixel_auroc,bank_entries,bank_bytes
std::string runs_csv(std::span<const ProtocolRun> runs);
// seed,arm,samples_used,auroc_max,aupr_max,auroc_mean,aupr_mean
std::string curves_csv(std::span<const ProtocolRun> runs);
std::string summary_csv(std::span<const ArmSummary> summary);
std::string protocol_json(std::span<const ProtocolRun> runs, std::span<const ArmSummary> summary);
enum class CurveMetric { Auroc, Aupr };

// Two-column "samples_used value" data averaged over runs, for gnuplot.
std::string curve_dat(std::span<const ProtocolRun> runs, ProtocolArm arm, ScoreMode mode,
                      CurveMetric metric);

// One batch-learning step: extract the batch images and rebuild the coreset
// over base_pool plus the batch from scratch.
MemoryBank batch_recoreset_step(std::span<const EmbeddingSet> base_pool,
                                std::span<const Image> batch, const ExtractorConfig& cfg,
                                double ratio, std::uint64_t seed);

}  // namespace corebank
