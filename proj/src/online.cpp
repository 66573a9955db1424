#include "corebank/online.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <optional>
#include <sstream>

#include <nlohmann/json.hpp>

#include "corebank/error.hpp"
#include "corebank/rng.hpp"
#include "format.hpp"

namespace corebank {

const char* to_string(BudgetScope scope) {
    return scope == BudgetScope::PerImage ? "per_image" : "per_sample";
}

const char* to_string(Strategy strategy) {
    return strategy == Strategy::IncrementalKCenter ? "ikcenter" : "baseline";
}

BudgetScope parse_budget_scope(const std::string& name) {
    if (name == "per_image") return BudgetScope::PerImage;
    if (name == "per_sample") return BudgetScope::PerSample;
    throw InvalidInput("unknown budget scope '" + name + "'");
}

Strategy parse_strategy(const std::string& name) {
    if (name == "ikcenter" || name == "incremental") return Strategy::IncrementalKCenter;
    if (name == "baseline") return Strategy::Baseline;
    throw InvalidInput("unknown strategy '" + name + "'");
}

void AdaptationConfig::validate() const {
    augment.validate();
    budget.validate();
    extractor.validate();
    if (strategy == Strategy::Baseline && !(baseline_ratio > 0.0 && baseline_ratio <= 1.0))
        throw InvalidInput("baseline_ratio must be in (0, 1]");
}

StepReport ingest(const StreamSample& sample, MemoryBank& bank, const AdaptationConfig& cfg,
                  const Extractor& extractor) {
    const auto start = std::chrono::steady_clock::now();
    cfg.validate();
    validate(sample.image);

    const bool blank = bank.empty() && bank.dim() == 0;
    StepReport report;
    report.task_id = sample.task_id;
    report.ord = sample.ord;
    TransientMeter meter;

    try {
        BankTransaction tx(bank);
        const std::size_t variants = cfg.augment.variant_count();
        std::size_t carried = 0;
        for (std::size_t v = 0; v < variants; ++v) {
            // Only one augmented copy and one embedding grid are alive at a time.
            std::optional<Image> augmented;
            if (v > 0) augmented = apply(cfg.augment.ops[v - 1], sample.image);
            const Image& image = augmented ? *augmented : sample.image;
            TransientMeter::Lease image_lease(meter, image.byte_size());

            std::string source_id = sample.task_id;
            if (v > 0) source_id += std::string("+") + to_string(cfg.augment.ops[v - 1]);
            const EmbeddingSet set = extractor.extract(image, source_id);
            TransientMeter::Lease set_lease(meter, set.byte_size());
            if (bank.empty() && bank.dim() == 0) bank = MemoryBank(set.dim());

            std::size_t quota = cfg.budget.max_new;
            if (cfg.budget_scope == BudgetScope::PerSample) {
                quota = cfg.budget.max_new / variants + (v < cfg.budget.max_new % variants ? 1 : 0) +
                        carried;
            }

            const std::size_t before = bank.size();
            if (cfg.strategy == Strategy::IncrementalKCenter) {
                const Selection sel =
                    incremental_kcenter_select(set, bank, {quota, cfg.budget.min_distance});
                TransientMeter::Lease scratch(meter, sel.scratch_bytes);
                bank.append(sel.picks, sample.task_id, sample.ord);
                for (double d : sel.distances)
                    report.max_selected_distance = std::max(report.max_selected_distance, d);
            } else if (quota > 0) {
                const double ratio = std::min(
                    cfg.baseline_ratio, static_cast<double>(quota) / static_cast<double>(set.size()));
                TransientMeter::Lease scratch(meter, set.size() * 2 * sizeof(double));
                const std::uint64_t seed =
                    derive_seed(cfg.seed, static_cast<std::uint64_t>(sample.ord) * variants + v);
                baseline_subsample_append(std::span<const EmbeddingSet>(&set, 1), ratio, seed,
                                          bank, sample.task_id, sample.ord);
                for (std::size_t i = before; i < bank.size(); ++i) {
                    double nearest = std::numeric_limits<double>::infinity();
                    for (std::size_t j = 0; j < before; ++j)
                        nearest = std::min(nearest, squared_distance(bank.entry(i), bank.entry(j)));
                    report.max_selected_distance = std::max(report.max_selected_distance, nearest);
                }
            }
            const std::size_t added = bank.size() - before;
            report.appended_count += added;
            if (cfg.budget_scope == BudgetScope::PerSample) carried = quota - std::min(quota, added);
        }
        tx.commit();
    } catch (...) {
        if (blank) bank = MemoryBank();
        throw;
    }

    report.bank_size_after = bank.size();
    report.peak_transient_bytes = meter.peak();
    report.elapsed_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return report;
}

StepReport ingest(const StreamSample& sample, MemoryBank& bank, const AdaptationConfig& cfg) {
    return ingest(sample, bank, cfg, DescriptorExtractor(cfg.extractor));
}

AdaptationReport run_session(std::span<const StreamSample> stream, MemoryBank& bank,
                             const AdaptationConfig& cfg, const Extractor& extractor) {
    AdaptationReport report;
    std::optional<std::int64_t> last_ord;
    for (std::size_t i = 0; i < stream.size(); ++i) {
        try {
            if (last_ord && stream[i].ord <= *last_ord)
                throw InvalidInput("sample ords must be strictly increasing (" +
                                   std::to_string(stream[i].ord) + " after " +
                                   std::to_string(*last_ord) + ")");
            StepReport step = ingest(stream[i], bank, cfg, extractor);
            step.step = i;
            report.steps.push_back(std::move(step));
            last_ord = stream[i].ord;
        } catch (...) {
            report.failure = std::current_exception();
            break;
        }
    }
    return report;
}

AdaptationReport run_session(std::span<const StreamSample> stream, MemoryBank& bank,
                             const AdaptationConfig& cfg) {
    return run_session(stream, bank, cfg, DescriptorExtractor(cfg.extractor));
}

std::string report_csv(const AdaptationReport& report, bool include_timing) {
    std::ostringstream out;
    out << "step,task_id,ord,appended_count,max_selected_distance,bank_size_after";
    if (include_timing) out << ",elapsed_seconds";
    out << ",peak_transient_bytes\n";
    for (const auto& s : report.steps) {
        out << s.step << ',' << s.task_id << ',' << s.ord << ',' << s.appended_count << ','
            << detail::fmt_double(s.max_selected_distance) << ',' << s.bank_size_after;
        if (include_timing) out << ',' << detail::fmt_double(s.elapsed_seconds);
        out << ',' << s.peak_transient_bytes << '\n';
    }
    return out.str();
}

std::string report_json(const AdaptationReport& report) {
    nlohmann::json steps = nlohmann::json::array();
    for (const auto& s : report.steps) {
        nlohmann::json row = {{"step", s.step},
                              {"task_id", s.task_id},
                              {"ord", s.ord},
                              {"appended_count", s.appended_count},
                              {"bank_size_after", s.bank_size_after},
                              {"elapsed_seconds", s.elapsed_seconds},
                              {"peak_transient_bytes", s.peak_transient_bytes}};
        row["max_selected_distance"] = std::isfinite(s.max_selected_distance)
                                           ? nlohmann::json(s.max_selected_distance)
                                           : nlohmann::json(nullptr);
        steps.push_back(std::move(row));
    }
    nlohmann::json doc = {{"steps", steps}};
    if (report.failure) {
        try {
            std::rethrow_exception(report.failure);
        } catch (const std::exception& e) {
            doc["failure"] = e.what();
        } catch (...) {
            doc["failure"] = "unknown error";
        }
    }
    return doc.dump(2) + "\n";
}

}  // namespace corebank
