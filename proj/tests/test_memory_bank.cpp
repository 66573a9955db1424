#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>

#include "corebank/error.hpp"
#include "corebank/memory_bank.hpp"
#include "corebank/rng.hpp"
#include "oracles.hpp"

using namespace corebank;

namespace {

EmbeddingSet row_set(const std::vector<std::vector<float>>& pts, std::string id = "s") {
    const int dim = pts.empty() ? 1 : static_cast<int>(pts[0].size());
    std::vector<float> data;
    for (const auto& p : pts) data.insert(data.end(), p.begin(), p.end());
    return EmbeddingSet(1, static_cast<int>(pts.size()), dim, std::move(data), std::move(id));
}

MemoryBank bank_of(const std::vector<std::vector<float>>& pts, int dim) {
    MemoryBank bank(dim);
    for (std::size_t i = 0; i < pts.size(); ++i) bank.append(pts[i], {"b", static_cast<std::int64_t>(i)});
    return bank;
}

std::vector<std::vector<float>> random_points(SplitMix64& rng, std::size_t n, int dim, bool lattice) {
    std::vector<std::vector<float>> pts(n, std::vector<float>(dim));
    for (auto& p : pts)
        for (auto& v : p)
            v = lattice ? static_cast<float>(rng.range(-3, 3)) : static_cast<float>(rng.uniform() * 2 - 1);
    return pts;
}

std::vector<oracle::Vec> to_vec(const std::vector<std::vector<float>>& pts) {
    std::vector<oracle::Vec> out;
    for (const auto& p : pts) out.emplace_back(p.begin(), p.end());
    return out;
}

}  // namespace

TEST_CASE("distance_to_bank examples") {
    const MemoryBank bank = bank_of({{0, 0}, {1, 0}}, 2);
    const std::vector<float> p{3, 0};
    const Match m = distance_to_bank(p, bank);
    CHECK(m.distance == 4.0);
    CHECK(m.index == 1);
    CHECK(distance_to_bank(std::vector<float>{1, 0}, bank).distance == 0.0);

    const MemoryBank tie = bank_of({{0, 0}, {2, 2}}, 2);
    const Match t = distance_to_bank(std::vector<float>{1, 1}, tie);
    CHECK(t.distance == 2.0);
    CHECK(t.index == 0);

    CHECK_THROWS_AS(distance_to_bank(p, MemoryBank(2)), EmptyBank);
    CHECK_THROWS_AS(distance_to_bank(std::vector<float>{1, 2, 3}, bank), DimMismatch);
}

TEST_CASE("nearest_neighbor examples") {
    const MemoryBank bank = bank_of({{0, 0}, {1, 0}}, 2);
    const Match m = nearest_neighbor(std::vector<float>{3, 0}, bank);
    CHECK(m.distance == 2.0);
    CHECK(m.index == 1);
    const Match self = nearest_neighbor(std::vector<float>{0, 0}, bank);
    CHECK(self.distance == 0.0);
    CHECK(self.index == 0);
}

TEST_CASE("nearest_neighbor matches exhaustive scan") {
    SplitMix64 rng(2024);
    const auto bank_pts = random_points(rng, 1000, 30, false);
    const auto queries = random_points(rng, 500, 30, false);
    const MemoryBank bank = bank_of(bank_pts, 30);
    const auto ref_bank = to_vec(bank_pts);
    for (const auto& q : queries) {
        const auto ref = oracle::scan(oracle::Vec(q.begin(), q.end()), ref_bank);
        const Match nn = nearest_neighbor(q, bank);
        const Match sq = distance_to_bank(q, bank);
        CHECK(nn.index == ref.index);
        CHECK(sq.index == ref.index);
        CHECK(nn.distance == doctest::Approx(std::sqrt(ref.sq_distance)).epsilon(1e-6));
        CHECK(nn.distance * nn.distance == doctest::Approx(sq.distance).epsilon(1e-6));
    }
}

TEST_CASE("incremental selection examples") {
    const MemoryBank bank = bank_of({{0}}, 1);
    const Selection s = incremental_kcenter_select(row_set({{0}, {5}, {10}}), bank, {2, 0.0});
    REQUIRE(s.picks.size() == 2);
    CHECK(s.picks[0].vector == std::vector<float>{10});
    CHECK(s.picks[1].vector == std::vector<float>{5});
    CHECK(s.distances == std::vector<double>{100.0, 25.0});
    CHECK(s.candidate_indices == std::vector<std::size_t>{2, 1});

    CHECK(incremental_kcenter_select(row_set({{0}, {5}}), bank, {0, 0.0}).picks.empty());
    CHECK(incremental_kcenter_select(row_set({{0}, {0}}), bank, {1, 1e-12}).picks.empty());
    CHECK_THROWS_AS(incremental_kcenter_select(row_set({{0, 1}}), bank, {1, 0.0}), DimMismatch);
}

TEST_CASE("empty bank starts from the largest norm") {
    const Selection s = incremental_kcenter_select(row_set({{1, 0}, {0, 3}, {-2, 0}}), MemoryBank(2), {1, 0.0});
    REQUIRE(s.candidate_indices.size() == 1);
    CHECK(s.candidate_indices[0] == 1);
    CHECK(MemoryBank().dim() == 0);
    CHECK_THROWS_AS(MemoryBank(0), InvalidInput);
}

TEST_CASE("incremental selection equals classic greedy seeded with the bank") {
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
        SplitMix64 rng(seed);
        const int dim = static_cast<int>(rng.range(1, 4));
        const auto n = static_cast<std::size_t>(rng.range(1, 64));
        const auto m = static_cast<std::size_t>(rng.range(seed % 10 == 0 ? 0 : 1, 32));
        const bool lattice = seed % 2 == 0;
        const auto cand = random_points(rng, n, dim, lattice);
        const auto base = random_points(rng, m, dim, lattice);
        const auto k = static_cast<std::size_t>(rng.range(0, static_cast<std::int64_t>(n) + 2));
        const double tau = seed % 3 == 0 ? rng.uniform() * 0.5 : 0.0;

        const Selection got = incremental_kcenter_select(row_set(cand), bank_of(base, dim), {k, tau});
        const auto want = oracle::greedy_kcenter(to_vec(cand), to_vec(base), k, tau);
        CAPTURE(seed);
        CHECK(got.candidate_indices == want);
        REQUIRE(got.picks.size() == got.candidate_indices.size());
        for (std::size_t i = 0; i < got.picks.size(); ++i)
            CHECK(got.picks[i].vector == cand[got.candidate_indices[i]]);
    }
}

TEST_CASE("append keeps indices and provenance") {
    SplitMix64 rng(1);
    MemoryBank bank = bank_of(random_points(rng, 10, 3, false), 3);
    const auto extra = random_points(rng, 3, 3, false);
    std::vector<PatchEmbedding> picks;
    for (const auto& e : extra) picks.push_back({e, 0, 0});
    bank.append(picks, "task", 7);
    REQUIRE(bank.size() == 13);
    for (std::size_t i = 10; i < 13; ++i) {
        CHECK(bank.provenance(i) == Provenance{"task", 7});
        CHECK(distance_to_bank(bank.entry(i), bank).distance == 0.0);
    }
    const MemoryBank before = bank;
    bank.append(std::span<const PatchEmbedding>{}, "none", 8);
    CHECK(bank == before);
    CHECK_THROWS_AS(bank.append(std::vector<float>{1, 2}, {"x", 0}), DimMismatch);
}

TEST_CASE("transaction rolls back unless committed") {
    MemoryBank bank = bank_of({{1}, {2}}, 1);
    {
        BankTransaction tx(bank);
        bank.append(std::vector<float>{3}, {"t", 1});
    }
    CHECK(bank.size() == 2);
    {
        BankTransaction tx(bank);
        bank.append(std::vector<float>{3}, {"t", 1});
        tx.commit();
    }
    CHECK(bank.size() == 3);
}

TEST_CASE("offline coreset examples") {
    const EmbeddingSet line = row_set({{0}, {1}, {9}, {10}});
    std::uint64_t seed = 0;
    while (SplitMix64(seed).next() % 4 != 0) ++seed;
    const MemoryBank two = offline_greedy_coreset(std::span(&line, 1), 2, seed);
    REQUIRE(two.size() == 2);
    CHECK(two.entry(0)[0] == 0.0f);
    CHECK(two.entry(1)[0] == 10.0f);

    for (std::uint64_t s : {0ull, 5ull, 99ull}) {
        const MemoryBank all = offline_greedy_coreset(std::span(&line, 1), 9, s);
        CHECK(all.data() == line.data());
        const MemoryBank one = offline_greedy_coreset(std::span(&line, 1), 1, s);
        REQUIRE(one.size() == 1);
        CHECK(one.entry(0)[0] == line.at(SplitMix64(s).next() % 4)[0]);
    }
    CHECK_THROWS_AS(offline_greedy_coreset(std::span<const EmbeddingSet>{}, 2, 0), InvalidInput);
}

TEST_CASE("offline coreset provenance names the source set") {
    std::vector<EmbeddingSet> pool{row_set({{0}, {1}}, "a"), row_set({{50}}, "b")};
    const MemoryBank bank = offline_greedy_coreset(pool, 3, 0);
    REQUIRE(bank.size() == 3);
    CHECK(bank.provenance(2) == Provenance{"b", 1});
    CHECK(bank.provenance(0).task_id == "a");
}

TEST_CASE("offline coreset is a 2-approximation") {
    int violations = 0;
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
        SplitMix64 rng(seed + 1000);
        const auto n = static_cast<std::size_t>(rng.range(1, 10));
        const auto k = static_cast<std::size_t>(rng.range(1, std::min<std::int64_t>(3, n)));
        const int dim = static_cast<int>(rng.range(1, 3));
        const auto pts = random_points(rng, n, dim, seed % 2 == 0);
        const EmbeddingSet set = row_set(pts);
        const MemoryBank bank = offline_greedy_coreset(std::span(&set, 1), k, seed);
        std::vector<oracle::Vec> centers;
        for (std::size_t i = 0; i < bank.size(); ++i)
            centers.emplace_back(bank.entry(i).begin(), bank.entry(i).end());
        const double greedy = oracle::covering_radius(to_vec(pts), centers);
        const double best = oracle::optimal_kcenter_radius(to_vec(pts), k);
        if (greedy > 2 * best + 1e-12) ++violations;
    }
    CHECK(violations == 0);
}

TEST_CASE("distances never grow as the bank grows") {
    SplitMix64 rng(77);
    for (int trial = 0; trial < 50; ++trial) {
        MemoryBank bank = bank_of(random_points(rng, 5, 4, false), 4);
        const auto q = random_points(rng, 1, 4, false)[0];
        double prev = distance_to_bank(q, bank).distance;
        for (const auto& e : random_points(rng, 10, 4, false)) {
            bank.append(e, {"x", 0});
            const double d = distance_to_bank(q, bank).distance;
            CHECK(d <= prev);
            prev = d;
        }
    }
}

TEST_CASE("baseline subsample-append ignores the bank") {
    SplitMix64 rng(3);
    const auto pts = random_points(rng, 100, 5, false);
    const EmbeddingSet pool = row_set(pts);
    MemoryBank bank(5);
    baseline_subsample_append(std::span(&pool, 1), 0.1, 4, bank, "t", 0);
    CHECK(bank.size() == 10);

    // Pool made of entries already in the bank: duplicates are appended anyway.
    const EmbeddingSet dup = row_set(std::vector<std::vector<float>>(pts.begin(), pts.begin() + 20));
    MemoryBank full = bank_of(pts, 5);
    baseline_subsample_append(std::span(&dup, 1), 0.1, 4, full, "t", 1);
    CHECK(full.size() == 102);
    CHECK(distance_to_bank(full.entry(100), bank_of(pts, 5)).distance == 0.0);
    CHECK(incremental_kcenter_select(dup, bank_of(pts, 5), {2, 1e-9}).picks.empty());

    MemoryBank a = bank_of(pts, 5), b = bank_of(pts, 5);
    baseline_subsample_append(std::span(&pool, 1), 0.1, 9, a, "t", 1);
    baseline_subsample_append(std::span(&pool, 1), 0.1, 9, b, "t", 1);
    CHECK(a == b);
}

TEST_CASE("CGMB round trip and errors") {
    SplitMix64 rng(5);
    MemoryBank bank(30);
    for (const auto& p : random_points(rng, 40, 30, false)) bank.append(p, {"task \"q\"", 3});
    const auto path = std::filesystem::temp_directory_path() / "corebank_test_bank.cgmb";
    save_bank(bank, path);
    const MemoryBank back = load_bank(path);
    CHECK(back == bank);
    CHECK(decode_bank(encode_bank(MemoryBank(7))) == MemoryBank(7));

    std::string bytes = encode_bank(bank);
    bytes[1] = 'X';
    CHECK_THROWS_AS(decode_bank(bytes), FormatError);
    CHECK_THROWS_AS(decode_bank(encode_bank(bank).substr(0, 30)), FormatError);
    CHECK_THROWS_AS(load_bank("/nonexistent/bank.cgmb"), IoError);

    const std::vector<float> q31(31, 0.0f);
    CHECK_THROWS_AS(nearest_neighbor(q31, back), DimMismatch);
}

TEST_CASE("same inputs and seed give bit-identical banks") {
    SplitMix64 rng(8);
    const EmbeddingSet pool = row_set(random_points(rng, 60, 6, false));
    CHECK(encode_bank(offline_greedy_coreset(std::span(&pool, 1), 7, 3)) ==
          encode_bank(offline_greedy_coreset(std::span(&pool, 1), 7, 3)));
}
