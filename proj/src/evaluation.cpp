#include "corebank/evaluation.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "corebank/error.hpp"
#include "corebank/metrics.hpp"
#include "corebank/online.hpp"
#include "corebank/parallel.hpp"
#include "corebank/rng.hpp"
#include "format.hpp"

namespace corebank {

BankFootprint measure_bank(const MemoryBank& bank) {
    BankFootprint fp;
    fp.header_bytes = kBankHeaderBytes;
    fp.data_bytes = bank.size() * static_cast<std::size_t>(bank.dim()) * sizeof(float);
    fp.footer_bytes = kBankFooterBytes;
    fp.trailer_bytes = encode_bank(bank).size() - fp.header_bytes - fp.data_bytes - fp.footer_bytes;
    return fp;
}

LatencyStats benchmark(const std::function<void()>& op, std::size_t reps, std::size_t warmup) {
    if (reps == 0) throw InvalidInput("benchmark needs at least one repetition");
    for (std::size_t i = 0; i < warmup; ++i) op();
    std::vector<double> times(reps);
    for (auto& t : times) {
        const auto start = std::chrono::steady_clock::now();
        op();
        t = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    }
    LatencyStats stats;
    stats.reps = reps;
    stats.mean_seconds = std::accumulate(times.begin(), times.end(), 0.0) / static_cast<double>(reps);
    std::sort(times.begin(), times.end());
    const auto rank = static_cast<std::size_t>(std::ceil(0.95 * static_cast<double>(reps)));
    stats.p95_seconds = times[std::max<std::size_t>(rank, 1) - 1];
    stats.min_seconds = times.front();
    stats.max_seconds = times.back();
    return stats;
}

// --- incremental scoring ------------------------------------------------------

IncrementalScorer::IncrementalScorer(std::vector<EmbeddingSet> queries)
    : queries_(std::move(queries)) {
    min_sq_.reserve(queries_.size());
    for (const auto& q : queries_)
        min_sq_.emplace_back(q.size(), std::numeric_limits<double>::infinity());
}

void IncrementalScorer::update(const MemoryBank& bank) {
    if (bank.size() < seen_) throw InvalidInput("bank shrank below the entries already scored");
    if (bank.size() == seen_) return;
    for (const auto& q : queries_)
        if (q.dim() != bank.dim()) throw DimMismatch(bank.dim(), q.dim());
    const std::size_t from = seen_;
    parallel_for(queries_.size(), [&](std::size_t qi) {
        const auto& q = queries_[qi];
        auto& mins = min_sq_[qi];
        for (std::size_t i = 0; i < q.size(); ++i) {
            const auto v = q.at(i);
            double best = mins[i];
            for (std::size_t j = from; j < bank.size(); ++j)
                best = std::min(best, squared_distance(v, bank.entry(j)));
            mins[i] = best;
        }
    });
    seen_ = bank.size();
}

PatchScores IncrementalScorer::scores(std::size_t query) const {
    if (seen_ == 0) throw EmptyBank();
    const auto& q = queries_.at(query);
    PatchScores out{q.rows(), q.cols(), std::vector<double>(q.size())};
    const auto& mins = min_sq_[query];
    std::transform(mins.begin(), mins.end(), out.scores.begin(), [](double d) { return std::sqrt(d); });
    return out;
}

double IncrementalScorer::image_score(std::size_t query, ScoreMode mode) const {
    return corebank::image_score(scores(query), mode);
}

// --- protocol -------------------------------------------------------------------

const char* to_string(ProtocolArm arm) {
    switch (arm) {
        case ProtocolArm::LowerBound: return "lower_bound";
        case ProtocolArm::UpperBound: return "upper_bound";
        case ProtocolArm::Baseline: return "baseline";
        case ProtocolArm::Incremental: return "incremental";
        case ProtocolArm::IncrementalAugment: return "incremental_augment";
        case ProtocolArm::IncrementalAugmentLimited: return "incremental_augment_limited";
    }
    return "?";
}

ProtocolArm parse_protocol_arm(const std::string& name) {
    for (ProtocolArm arm : all_protocol_arms())
        if (name == to_string(arm)) return arm;
    throw InvalidInput("unknown protocol arm '" + name + "'");
}

std::vector<ProtocolArm> all_protocol_arms() {
    return {ProtocolArm::LowerBound,         ProtocolArm::UpperBound,
            ProtocolArm::Baseline,           ProtocolArm::Incremental,
            ProtocolArm::IncrementalAugment, ProtocolArm::IncrementalAugmentLimited};
}

void ProtocolOptions::validate() const {
    extractor.validate();
    if (defects_per_variant < 1) throw InvalidInput("defects_per_variant must be >= 1");
    if (!(coreset_ratio > 0.0 && coreset_ratio <= 1.0))
        throw InvalidInput("coreset_ratio must be in (0, 1]");
    if (!(min_distance >= 0.0)) throw InvalidInput("min_distance must be >= 0");
    if (arms.empty()) throw InvalidInput("protocol needs at least one arm");
    const bool augments = std::any_of(arms.begin(), arms.end(), [](ProtocolArm a) {
        return a == ProtocolArm::IncrementalAugment || a == ProtocolArm::IncrementalAugmentLimited;
    });
    if (augments && augment_ops.empty()) throw InvalidInput("augmentation arms need augment_ops");
}

const ArmResult& ProtocolRun::arm(ProtocolArm which) const {
    for (const auto& a : arms)
        if (a.arm == which) return a;
    throw InvalidInput(std::string("protocol run has no arm ") + to_string(which));
}

namespace {

std::size_t coreset_size(std::span<const EmbeddingSet> pool, double ratio) {
    std::size_t n = 0;
    for (const auto& s : pool) n += s.size();
    return std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(ratio * static_cast<double>(n) - 1e-9)));
}

struct EvalTargets {
    std::vector<std::uint8_t> labels;
    const std::vector<LabeledImage>* images = nullptr;
};

ModeMetrics metrics_for(const IncrementalScorer& scorer, const EvalTargets& eval, ScoreMode mode) {
    std::vector<double> s(scorer.query_count());
    for (std::size_t i = 0; i < s.size(); ++i) s[i] = scorer.image_score(i, mode);
    return {auroc(s, eval.labels), aupr(s, eval.labels)};
}

CurvePoint point_for(const IncrementalScorer& scorer, const EvalTargets& eval, std::size_t used) {
    return {used, metrics_for(scorer, eval, ScoreMode::Max), metrics_for(scorer, eval, ScoreMode::Mean)};
}

std::optional<double> pixel_auroc_for(const IncrementalScorer& scorer, const EvalTargets& eval,
                                      const ExtractorConfig& cfg) {
    std::vector<double> values;
    std::vector<std::uint8_t> labels;
    for (std::size_t i = 0; i < scorer.query_count(); ++i) {
        const auto& item = (*eval.images)[i];
        const AnomalyMap map = to_anomaly_map(scorer.scores(i), item.image.width, item.image.height, cfg, 0.0);
        values.insert(values.end(), map.values.begin(), map.values.end());
        for (auto m : item.mask.pixels) labels.push_back(m != 0 ? 1 : 0);
    }
    const bool has_pos = std::find(labels.begin(), labels.end(), 1) != labels.end();
    const bool has_neg = std::find(labels.begin(), labels.end(), 0) != labels.end();
    if (!has_pos || !has_neg) return std::nullopt;
    return auroc(values, labels);
}

}  // namespace

ProtocolRun run_protocol(const std::vector<SceneConfig>& pretrain,
                         const std::vector<SceneConfig>& adapt,
                         const std::vector<LabeledImage>& eval, const ProtocolOptions& options,
                         std::uint64_t seed) {
    options.validate();
    if (pretrain.empty()) throw InvalidInput("protocol needs pre-training variants");
    if (eval.empty()) throw InvalidInput("protocol needs an evaluation set");

    std::set<std::uint32_t> pre_codes, adapt_codes, eval_codes;
    for (const auto& c : pretrain) pre_codes.insert(c.layout_code());
    for (const auto& c : adapt) adapt_codes.insert(c.layout_code());
    for (const auto& e : eval) eval_codes.insert(e.config.layout_code());
    auto overlaps = [](const std::set<std::uint32_t>& a, const std::set<std::uint32_t>& b) {
        return std::any_of(a.begin(), a.end(), [&](std::uint32_t c) { return b.count(c) > 0; });
    };
    if (overlaps(pre_codes, adapt_codes) || overlaps(pre_codes, eval_codes) ||
        overlaps(adapt_codes, eval_codes))
        throw InvalidInput("pre-training, adaptation and evaluation variants must be disjoint");

    const DescriptorExtractor extractor(options.extractor);

    std::vector<EmbeddingSet> pretrain_pool(pretrain.size());
    parallel_for(pretrain.size(), [&](std::size_t i) {
        pretrain_pool[i] = extractor.extract(render_normal(pretrain[i]), "pretrain_" + std::to_string(i));
    });
    const MemoryBank pretrained = offline_greedy_coreset(
        pretrain_pool, coreset_size(pretrain_pool, options.coreset_ratio), derive_seed(seed, 11));

    std::vector<EmbeddingSet> eval_sets(eval.size());
    parallel_for(eval.size(), [&](std::size_t i) { eval_sets[i] = extractor.extract(eval[i].image, eval[i].name); });
    EvalTargets targets;
    targets.images = &eval;
    for (const auto& e : eval) targets.labels.push_back(e.defective ? 1 : 0);

    IncrementalScorer pretrained_scorer(eval_sets);
    pretrained_scorer.update(pretrained);

    std::vector<StreamSample> stream;
    stream.reserve(adapt.size());
    for (std::size_t i = 0; i < adapt.size(); ++i)
        stream.push_back({render_normal(adapt[i]), "adapt_" + std::to_string(i), static_cast<std::int64_t>(i)});

    ProtocolRun run;
    run.seed = seed;
    auto finish = [&](ArmResult& result, const IncrementalScorer& scorer) {
        const CurvePoint last = result.curve.empty() ? point_for(scorer, targets, 0) : result.curve.back();
        const ModeMetrics& m = options.mode == ScoreMode::Max ? last.max : last.mean;
        result.auroc = m.auroc;
        result.aupr = m.aupr;
        if (options.pixel_metrics) result.pixel_auroc = pixel_auroc_for(scorer, targets, options.extractor);
    };

    for (ProtocolArm arm : options.arms) {
        ArmResult result;
        result.arm = arm;
        switch (arm) {
            case ProtocolArm::LowerBound: {
                const CurvePoint flat = point_for(pretrained_scorer, targets, 0);
                for (std::size_t i = 1; i <= adapt.size(); ++i) {
                    result.curve.push_back(flat);
                    result.curve.back().samples_used = i;
                }
                result.bank = pretrained;
                finish(result, pretrained_scorer);
                break;
            }
            case ProtocolArm::UpperBound: {
                std::vector<EmbeddingSet> pool = pretrain_pool;
                for (const auto& s : stream) pool.push_back(extractor.extract(s.image, s.task_id));
                result.bank = offline_greedy_coreset(pool, coreset_size(pool, options.coreset_ratio),
                                                     derive_seed(seed, 12));
                IncrementalScorer scorer(eval_sets);
                scorer.update(result.bank);
                result.curve.push_back(point_for(scorer, targets, adapt.size()));
                finish(result, scorer);
                break;
            }
            default: {
                AdaptationConfig cfg;
                cfg.extractor = options.extractor;
                cfg.budget = {options.max_new, options.min_distance};
                cfg.seed = derive_seed(seed, 13);
                if (arm == ProtocolArm::Baseline) {
                    cfg.strategy = Strategy::Baseline;
                    const int patches = options.extractor.grid_rows(SceneConfig::kHeight) *
                                        options.extractor.grid_cols(SceneConfig::kWidth);
                    cfg.baseline_ratio = std::min(1.0, static_cast<double>(std::max<std::size_t>(options.max_new, 1)) / patches);
                }
                if (arm == ProtocolArm::IncrementalAugment || arm == ProtocolArm::IncrementalAugmentLimited) {
                    cfg.augment = {options.augment_ops, true};
                    cfg.budget_scope = arm == ProtocolArm::IncrementalAugment ? BudgetScope::PerImage
                                                                               : BudgetScope::PerSample;
                }
                result.bank = pretrained;
                IncrementalScorer scorer = pretrained_scorer;
                for (std::size_t i = 0; i < stream.size(); ++i) {
                    ingest(stream[i], result.bank, cfg, extractor);
                    scorer.update(result.bank);
                    result.curve.push_back(point_for(scorer, targets, i + 1));
                }
                finish(result, scorer);
                break;
            }
        }
        run.arms.push_back(std::move(result));
    }
    return run;
}

ProtocolRun run_seeded_protocol(const ProtocolOptions& options, std::uint64_t seed) {
    const auto pretrain = enumerate_variants(
        options.pretrain_variants, derive_seed(seed, 1),
        [](const SceneConfig& c) { return c.has_shape() && !c.has_rotation(); });
    auto fresh = enumerate_variants(options.adapt_variants + options.eval_variants,
                                    derive_seed(seed, 2),
                                    [](const SceneConfig& c) { return c.has_rotation(); });
    const std::vector<SceneConfig> adapt(fresh.begin(),
                                         fresh.begin() + static_cast<std::ptrdiff_t>(options.adapt_variants));
    const std::vector<SceneConfig> eval_variants(
        fresh.begin() + static_cast<std::ptrdiff_t>(options.adapt_variants), fresh.end());
    const auto eval = make_eval_set(eval_variants, options.defects_per_variant, derive_seed(seed, 3));
    return run_protocol(pretrain, adapt, eval, options, seed);
}

std::vector<ArmSummary> summarize(std::span<const ProtocolRun> runs) {
    std::vector<ArmSummary> out;
    if (runs.empty()) return out;
    for (const auto& first : runs.front().arms) {
        std::vector<double> au, ap;
        for (const auto& run : runs) {
            const auto& a = run.arm(first.arm);
            au.push_back(a.auroc);
            ap.push_back(a.aupr);
        }
        auto mean = [](const std::vector<double>& v) {
            return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
        };
        auto stddev = [&](const std::vector<double>& v) {
            const double m = mean(v);
            double s = 0.0;
            for (double x : v) s += (x - m) * (x - m);
            return v.size() > 1 ? std::sqrt(s / static_cast<double>(v.size() - 1)) : 0.0;
        };
        out.push_back({first.arm, mean(au), stddev(au), mean(ap), stddev(ap), runs.size()});
    }
    return out;
}

std::string runs_csv(std::span<const ProtocolRun> runs) {
    std::ostringstream out;
    out << "seed,arm,auroc,aupr,pixel_auroc,bank_entries,bank_bytes\n";
    for (const auto& run : runs)
        for (const auto& a : run.arms)
            out << run.seed << ',' << to_string(a.arm) << ',' << detail::fmt_double(a.auroc) << ','
                << detail::fmt_double(a.aupr) << ','
                << (a.pixel_auroc ? detail::fmt_double(*a.pixel_auroc) : std::string()) << ','
                << a.bank.size() << ',' << measure_bank(a.bank).total() << '\n';
    return out.str();
}

std::string curves_csv(std::span<const ProtocolRun> runs) {
    std::ostringstream out;
    out << "seed,arm,samples_used,auroc_max,aupr_max,auroc_mean,aupr_mean\n";
    for (const auto& run : runs)
        for (const auto& a : run.arms)
            for (const auto& p : a.curve)
                out << run.seed << ',' << to_string(a.arm) << ',' << p.samples_used << ','
                    << detail::fmt_double(p.max.auroc) << ',' << detail::fmt_double(p.max.aupr) << ','
                    << detail::fmt_double(p.mean.auroc) << ',' << detail::fmt_double(p.mean.aupr) << '\n';
    return out.str();
}

std::string summary_csv(std::span<const ArmSummary> summary) {
    std::ostringstream out;
    out << "arm,runs,auroc_mean,auroc_std,aupr_mean,aupr_std\n";
    for (const auto& s : summary)
        out << to_string(s.arm) << ',' << s.runs << ',' << detail::fmt_double(s.auroc_mean) << ','
            << detail::fmt_double(s.auroc_std) << ',' << detail::fmt_double(s.aupr_mean) << ','
            << detail::fmt_double(s.aupr_std) << '\n';
    return out.str();
}

std::string protocol_json(std::span<const ProtocolRun> runs, std::span<const ArmSummary> summary) {
    nlohmann::json jr = nlohmann::json::array();
    for (const auto& run : runs) {
        nlohmann::json arms = nlohmann::json::array();
        for (const auto& a : run.arms) {
            nlohmann::json curve = nlohmann::json::array();
            for (const auto& p : a.curve)
                curve.push_back({{"samples_used", p.samples_used},
                                 {"max", {{"auroc", p.max.auroc}, {"aupr", p.max.aupr}}},
                                 {"mean", {{"auroc", p.mean.auroc}, {"aupr", p.mean.aupr}}}});
            nlohmann::json arm = {{"arm", to_string(a.arm)},
                                  {"auroc", a.auroc},
                                  {"aupr", a.aupr},
                                  {"bank_entries", a.bank.size()},
                                  {"bank_bytes", measure_bank(a.bank).total()},
                                  {"curve", curve}};
            arm["pixel_auroc"] = a.pixel_auroc ? nlohmann::json(*a.pixel_auroc) : nlohmann::json(nullptr);
            arms.push_back(std::move(arm));
        }
        jr.push_back({{"seed", run.seed}, {"arms", arms}});
    }
    nlohmann::json js = nlohmann::json::array();
    for (const auto& s : summary)
        js.push_back({{"arm", to_string(s.arm)},
                      {"runs", s.runs},
                      {"auroc_mean", s.auroc_mean},
                      {"auroc_std", s.auroc_std},
                      {"aupr_mean", s.aupr_mean},
                      {"aupr_std", s.aupr_std}});
    return nlohmann::json{{"runs", jr}, {"summary", js}}.dump(2) + "\n";
}

std::string curve_dat(std::span<const ProtocolRun> runs, ProtocolArm arm, ScoreMode mode,
                      CurveMetric metric) {
    std::ostringstream out;
    out << "# " << to_string(arm) << ' ' << to_string(mode) << ' '
        << (metric == CurveMetric::Auroc ? "auroc" : "aupr") << " averaged over " << runs.size()
        << " runs\n# samples_used value\n";
    if (runs.empty()) return out.str();
    const auto& first = runs.front().arm(arm).curve;
    for (std::size_t k = 0; k < first.size(); ++k) {
        double sum = 0.0;
        for (const auto& run : runs) {
            const CurvePoint& p = run.arm(arm).curve.at(k);
            const ModeMetrics& m = mode == ScoreMode::Max ? p.max : p.mean;
            sum += metric == CurveMetric::Auroc ? m.auroc : m.aupr;
        }
        out << first[k].samples_used << ' ' << detail::fmt_double(sum / static_cast<double>(runs.size())) << '\n';
    }
    return out.str();
}

MemoryBank batch_recoreset_step(std::span<const EmbeddingSet> base_pool,
                                std::span<const Image> batch, const ExtractorConfig& cfg,
                                double ratio, std::uint64_t seed) {
    if (!(ratio > 0.0 && ratio <= 1.0)) throw InvalidInput("coreset ratio must be in (0, 1]");
    std::vector<EmbeddingSet> pool(base_pool.begin(), base_pool.end());
    for (std::size_t i = 0; i < batch.size(); ++i) {
        pool.push_back(extract_patches(batch[i], cfg));
        pool.back().set_source_id("batch_" + std::to_string(i));
    }
    return offline_greedy_coreset(pool, coreset_size(pool, ratio), seed);
}

}  // namespace corebank
