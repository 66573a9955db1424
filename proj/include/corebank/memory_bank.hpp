#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "corebank/features.hpp"

namespace corebank {

struct Provenance {
    std::string task_id;
    std::int64_t sample_ord = 0;

    friend bool operator==(const Provenance&, const Provenance&) = default;
};

// Append-only coreset of patch embeddings. Entry indices are stable: nothing
// is ever reordered or removed once committed.
class MemoryBank {
public:
    MemoryBank() = default;
    explicit MemoryBank(int dim);

    int dim() const { return dim_; }
    std::size_t size() const { return provenance_.size(); }
    bool empty() const { return provenance_.empty(); }

    std::span<const float> entry(std::size_t i) const {
        return {data_.data() + i * dim_, static_cast<std::size_t>(dim_)};
    }
    const Provenance& provenance(std::size_t i) const { return provenance_[i]; }
    const std::vector<float>& data() const { return data_; }
    const std::vector<Provenance>& provenance() const { return provenance_; }

    void append(std::span<const float> vector, Provenance prov);
    void append(std::span<const PatchEmbedding> selected, const std::string& task_id,
                std::int64_t sample_ord);

    friend bool operator==(const MemoryBank&, const MemoryBank&) = default;

private:
    friend class BankTransaction;
    void truncate(std::size_t count);

    int dim_ = 0;
    std::vector<float> data_;
    std::vector<Provenance> provenance_;
};

// Restores the bank to its size at construction unless commit() is called.
class BankTransaction {
public:
    explicit BankTransaction(MemoryBank& bank) : bank_(bank), mark_(bank.size()) {}
    ~BankTransaction() {
        if (!committed_) bank_.truncate(mark_);
    }
    BankTransaction(const BankTransaction&) = delete;
    BankTransaction& operator=(const BankTransaction&) = delete;

    void commit() { committed_ = true; }

private:
    MemoryBank& bank_;
    std::size_t mark_;
    bool committed_ = false;
};

struct SelectionBudget {
    std::size_t max_new = 0;
    // Squared-distance threshold; selection stops once the best remaining
    // candidate is closer than this to the bank.
    double min_distance = 0.0;

    void validate() const;
};

struct Match {
    double distance = 0.0;
    std::size_t index = 0;
};

double squared_distance(std::span<const float> a, std::span<const float> b);

// min_i ‖p − m_i‖² with its argmin (lowest index on ties).
Match distance_to_bank(std::span<const float> p, const MemoryBank& bank);

// min_j ‖t − m_j‖₂ with its argmin (lowest index on ties).
Match nearest_neighbor(std::span<const float> query, const MemoryBank& bank);

struct Selection {
    std::vector<PatchEmbedding> picks;
    // Squared distance of each pick to bank ∪ earlier picks at selection time.
    std::vector<double> distances;
    // Flat grid index of each pick within the candidate set.
    std::vector<std::size_t> candidate_indices;
    // Bytes of working memory held by the selection loop.
    std::size_t scratch_bytes = 0;
};

// Greedy farthest-point selection of candidates against the bank: repeatedly
// take the candidate farthest (squared distance) from bank ∪ picks so far.
// Stops at budget.max_new picks, when candidates run out, or when the best
// remaining distance drops below budget.min_distance. Ties go to the lowest
// grid index. With an empty bank the first pick is the candidate of largest
// L2 norm. The bank is not modified.
Selection incremental_kcenter_select(const EmbeddingSet& candidates, const MemoryBank& bank,
                                     const SelectionBudget& budget);

// Classic greedy k-center over the flattened pool (set order, then row-major).
// The first center is SplitMix64(seed).next() % n; k ≥ n returns every point.
// Provenance of each entry is (source_id of its set, index of its set).
MemoryBank offline_greedy_coreset(std::span<const EmbeddingSet> pool, std::size_t k,
                                  std::uint64_t seed);

// Subsamples the pool alone (k = ceil(ratio·n)) without looking at the bank,
// then appends the result under the given provenance.
void baseline_subsample_append(std::span<const EmbeddingSet> pool, double ratio,
                               std::uint64_t seed, MemoryBank& bank, const std::string& task_id,
                               std::int64_t sample_ord);

// CGMB bank files: "CGMB", u32 version = 1, u32 dim, u64 entry_count,
// entry_count·dim float32 LE, a JSON provenance array, then the u64 byte
// length of that JSON.
inline constexpr std::size_t kBankHeaderBytes = 4 + 4 + 4 + 8;
inline constexpr std::size_t kBankFooterBytes = 8;

std::string encode_bank(const MemoryBank& bank);
MemoryBank decode_bank(std::string_view bytes);
void save_bank(const MemoryBank& bank, const std::filesystem::path& path);
MemoryBank load_bank(const std::filesystem::path& path);

}  // namespace corebank
