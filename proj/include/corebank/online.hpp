#pragma once

#include <cstddef>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "corebank/augment.hpp"
#include "corebank/features.hpp"
#include "corebank/image.hpp"
#include "corebank/memory_bank.hpp"

namespace corebank {

struct StreamSample {
    Image image;
    std::string task_id;
    std::int64_t ord = 0;
};

enum class BudgetScope { PerImage, PerSample };
enum class Strategy { IncrementalKCenter, Baseline };

const char* to_string(BudgetScope scope);
const char* to_string(Strategy strategy);
BudgetScope parse_budget_scope(const std::string& name);
Strategy parse_strategy(const std::string& name);

struct AdaptationConfig {
    AugmentPolicy augment;
    SelectionBudget budget;
    BudgetScope budget_scope = BudgetScope::PerImage;
    ExtractorConfig extractor;
    Strategy strategy = Strategy::IncrementalKCenter;
    // Baseline only: fraction of each image's patches kept by the
    // bank-agnostic subsampler, and the seed it draws its first center from.
    double baseline_ratio = 0.1;
    std::uint64_t seed = 0;

    void validate() const;
};

struct StepReport {
    std::size_t step = 0;
    std::string task_id;
    std::int64_t ord = 0;
    std::size_t appended_count = 0;
    // Largest squared distance among appended entries; 0 when nothing was
    // appended, +inf when the first pick was made against an empty bank.
    double max_selected_distance = 0.0;
    std::size_t bank_size_after = 0;
    double elapsed_seconds = 0.0;
    std::size_t peak_transient_bytes = 0;
};

struct AdaptationReport {
    std::vector<StepReport> steps;
    // Set when the session stopped early; steps holds the completed prefix.
    std::exception_ptr failure;
};

// Per-step accounting of transient buffers (variant image, embedding grid,
// selection scratch). Each buffer registers its byte size while alive.
class TransientMeter {
public:
    class Lease {
    public:
        Lease(TransientMeter& meter, std::size_t bytes) : meter_(&meter), bytes_(bytes) {
            meter_->acquire(bytes_);
        }
        ~Lease() {
            if (meter_) meter_->release(bytes_);
        }
        Lease(const Lease&) = delete;
        Lease& operator=(const Lease&) = delete;

    private:
        TransientMeter* meter_;
        std::size_t bytes_;
    };

    void acquire(std::size_t bytes) {
        current_ += bytes;
        if (current_ > peak_) peak_ = current_;
    }
    void release(std::size_t bytes) { current_ -= bytes; }
    std::size_t peak() const { return peak_; }
    std::size_t current() const { return current_; }

private:
    std::size_t current_ = 0;
    std::size_t peak_ = 0;
};

// Adapts the bank to one sample: each augmented variant is generated,
// extracted, selected against the bank as already grown by earlier variants,
// and appended, one variant at a time. On any error the bank is restored to
// its state before the call and the error propagates.
StepReport ingest(const StreamSample& sample, MemoryBank& bank, const AdaptationConfig& cfg,
                  const Extractor& extractor);
StepReport ingest(const StreamSample& sample, MemoryBank& bank, const AdaptationConfig& cfg);

// Folds ingest over the stream. Sample ords must be strictly increasing. The
// session stops at the first failing step, keeping the bank as of the last
// successful step.
AdaptationReport run_session(std::span<const StreamSample> stream, MemoryBank& bank,
                             const AdaptationConfig& cfg, const Extractor& extractor);
AdaptationReport run_session(std::span<const StreamSample> stream, MemoryBank& bank,
                             const AdaptationConfig& cfg);

// CSV header: step,task_id,ord,appended_count,max_selected_distance,
// bank_size_after,elapsed_seconds,peak_transient_bytes
std::string report_csv(const AdaptationReport& report, bool include_timing = true);
std::string report_json(const AdaptationReport& report);

}  // namespace corebank
