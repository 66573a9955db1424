#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "corebank/error.hpp"
#include "corebank/online.hpp"
#include "corebank/testbed.hpp"

using namespace corebank;

namespace {

std::vector<StreamSample> stream_of(std::size_t n, std::uint64_t seed) {
    std::vector<StreamSample> out;
    const auto variants = enumerate_variants(n, seed);
    for (std::size_t i = 0; i < n; ++i)
        out.push_back({render_normal(variants[i]), "v" + std::to_string(i), static_cast<std::int64_t>(i)});
    return out;
}

MemoryBank pretrained(std::uint64_t seed) {
    const auto imgs = stream_of(2, seed);
    std::vector<EmbeddingSet> pool;
    for (const auto& s : imgs) pool.push_back(extract_patches(s.image, ExtractorConfig{}));
    return offline_greedy_coreset(pool, 40, 0);
}

AdaptationConfig config(std::size_t max_new, double tau = 0.0) {
    AdaptationConfig cfg;
    cfg.budget = {max_new, tau};
    cfg.augment.ops = {AugmentOp::Sharpen, AugmentOp::Blur};
    return cfg;
}

// Fails on its nth extraction.
class FailingExtractor final : public Extractor {
public:
    explicit FailingExtractor(int fail_on) : fail_on_(fail_on) {}
    EmbeddingSet extract(const Image& image, std::string_view source_id) const override {
        if (++calls_ == fail_on_) throw std::runtime_error("injected fault");
        return inner_.extract(image, source_id);
    }

private:
    DescriptorExtractor inner_;
    int fail_on_;
    mutable int calls_ = 0;
};

}  // namespace

TEST_CASE("zero budget leaves the bank alone") {
    MemoryBank bank = pretrained(1);
    const MemoryBank before = bank;
    const auto s = stream_of(1, 2);
    const StepReport r = ingest(s[0], bank, config(0));
    CHECK(r.appended_count == 0);
    CHECK(r.max_selected_distance == 0.0);
    CHECK(bank == before);
}

TEST_CASE("one sample grows the bank by at most the budget") {
    MemoryBank bank = pretrained(1);
    const std::size_t n0 = bank.size();
    const auto s = stream_of(1, 3);
    const StepReport r = ingest(s[0], bank, config(10));
    CHECK(r.appended_count <= 10);
    CHECK(bank.size() == n0 + r.appended_count);
    CHECK(r.bank_size_after == bank.size());
    for (std::size_t i = n0; i < bank.size(); ++i) CHECK(bank.provenance(i) == Provenance{"v0", 0});
}

TEST_CASE("a repeated sample adds nothing under a positive threshold") {
    MemoryBank bank = pretrained(1);
    auto s = stream_of(1, 4);
    AdaptationConfig cfg = config(1000, 1e-9);
    ingest(s[0], bank, cfg);
    s[0].ord = 1;
    const StepReport again = ingest(s[0], bank, cfg);
    CHECK(again.appended_count == 0);
}

TEST_CASE("an empty bank bootstraps from the first sample") {
    MemoryBank bank;
    const auto s = stream_of(1, 5);
    const StepReport r = ingest(s[0], bank, config(5));
    CHECK(bank.dim() == 26);
    CHECK(r.appended_count == 5);
    CHECK(std::isinf(r.max_selected_distance));
}

TEST_CASE("empty stream") {
    MemoryBank bank = pretrained(1);
    const MemoryBank before = bank;
    const AdaptationReport r = run_session({}, bank, config(10));
    CHECK(r.steps.empty());
    CHECK(!r.failure);
    CHECK(bank == before);
}

TEST_CASE("per-sample budget grows the bank by exactly N times b") {
    for (bool augment : {false, true}) {
        MemoryBank bank = pretrained(1);
        const std::size_t n0 = bank.size();
        AdaptationConfig cfg = config(7);
        cfg.augment.enabled = augment;
        cfg.budget_scope = BudgetScope::PerSample;
        const auto s = stream_of(4, 6);
        const AdaptationReport r = run_session(s, bank, cfg);
        CHECK(!r.failure);
        CHECK(bank.size() == n0 + 4 * 7);
        for (const auto& step : r.steps) CHECK(step.appended_count == 7);
    }
}

TEST_CASE("per-image budget applies to every variant") {
    MemoryBank bank = pretrained(1);
    const std::size_t n0 = bank.size();
    AdaptationConfig cfg = config(7);
    cfg.augment.enabled = true;
    const auto s = stream_of(1, 6);
    CHECK(ingest(s[0], bank, cfg).appended_count == 21);
    CHECK(bank.size() == n0 + 21);
}

TEST_CASE("replay is deterministic") {
    for (Strategy strategy : {Strategy::IncrementalKCenter, Strategy::Baseline}) {
        AdaptationConfig cfg = config(9);
        cfg.augment.enabled = true;
        cfg.strategy = strategy;
        cfg.seed = 42;
        const auto s = stream_of(3, 7);
        MemoryBank a = pretrained(1), b = pretrained(1);
        const auto ra = run_session(s, a, cfg);
        const auto rb = run_session(s, b, cfg);
        CHECK(a == b);
        CHECK(report_csv(ra, false) == report_csv(rb, false));
        CHECK(encode_bank(a) == encode_bank(b));
    }
}

TEST_CASE("stream order does not change the final bank size") {
    auto s = stream_of(4, 8);
    MemoryBank a = pretrained(1);
    run_session(s, a, config(6));
    std::reverse(s.begin(), s.end());
    for (std::size_t i = 0; i < s.size(); ++i) s[i].ord = static_cast<std::int64_t>(i);
    MemoryBank b = pretrained(1);
    run_session(s, b, config(6));
    CHECK(a.size() == b.size());
}

TEST_CASE("peak transient bytes do not depend on stream length") {
    MemoryBank bank = pretrained(1);
    AdaptationConfig cfg = config(4);
    cfg.augment.enabled = true;
    const auto s = stream_of(12, 9);
    const AdaptationReport r = run_session(s, bank, cfg);
    REQUIRE(r.steps.size() == 12);
    const double first = static_cast<double>(r.steps.front().peak_transient_bytes);
    CHECK(first > 0);
    for (const auto& step : r.steps)
        CHECK(std::abs(static_cast<double>(step.peak_transient_bytes) - first) < 0.1 * first);
}

TEST_CASE("a failing step leaves the bank as it was") {
    MemoryBank bank = pretrained(1);
    const MemoryBank before = bank;
    AdaptationConfig cfg = config(10);
    cfg.augment.enabled = true;
    const auto s = stream_of(1, 10);
    FailingExtractor failing(2);
    CHECK_THROWS_AS(ingest(s[0], bank, cfg, failing), std::runtime_error);
    CHECK(bank == before);

    MemoryBank blank;
    FailingExtractor failing_again(2);
    CHECK_THROWS(ingest(s[0], blank, cfg, failing_again));
    CHECK(blank == MemoryBank());
}

TEST_CASE("session stops at the first failure and keeps earlier steps") {
    MemoryBank bank = pretrained(1);
    const auto s = stream_of(3, 11);
    FailingExtractor failing(2);
    const AdaptationReport r = run_session(s, bank, config(5), failing);
    CHECK(r.steps.size() == 1);
    CHECK(r.failure);
    CHECK(bank.size() == r.steps[0].bank_size_after);
    CHECK(report_json(r).find("injected fault") != std::string::npos);
}

TEST_CASE("non-increasing ords halt the session") {
    MemoryBank bank = pretrained(1);
    auto s = stream_of(3, 12);
    s[2].ord = 1;
    const AdaptationReport r = run_session(s, bank, config(5));
    CHECK(r.steps.size() == 2);
    REQUIRE(r.failure);
    CHECK_THROWS_AS(std::rethrow_exception(r.failure), InvalidInput);
}

TEST_CASE("report CSV layout") {
    MemoryBank bank = pretrained(1);
    const auto s = stream_of(2, 13);
    const AdaptationReport r = run_session(s, bank, config(3));
    const std::string csv = report_csv(r);
    CHECK(csv.rfind("step,task_id,ord,appended_count,max_selected_distance,bank_size_after,"
                    "elapsed_seconds,peak_transient_bytes\n", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);
    CHECK(report_csv(r, false).find("elapsed") == std::string::npos);
}

TEST_CASE("invalid configuration") {
    MemoryBank bank = pretrained(1);
    const auto s = stream_of(1, 14);
    AdaptationConfig cfg = config(3);
    cfg.augment.ops.clear();
    cfg.augment.enabled = true;
    CHECK_THROWS_AS(ingest(s[0], bank, cfg), InvalidInput);
    CHECK(parse_strategy("baseline") == Strategy::Baseline);
    CHECK(parse_budget_scope("per_sample") == BudgetScope::PerSample);
    CHECK_THROWS_AS(parse_budget_scope("global"), InvalidInput);
}
