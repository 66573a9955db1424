#include "corebank/memory_bank.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <nlohmann/json.hpp>

#include "bytes.hpp"
#include "corebank/error.hpp"
#include "corebank/parallel.hpp"
#include "corebank/rng.hpp"

namespace corebank {

MemoryBank::MemoryBank(int dim) : dim_(dim) {
    if (dim < 1) throw InvalidInput("bank dimension must be >= 1");
}

void MemoryBank::append(std::span<const float> vector, Provenance prov) {
    if (vector.size() != static_cast<std::size_t>(dim_)) throw DimMismatch(dim_, vector.size());
    data_.insert(data_.end(), vector.begin(), vector.end());
    provenance_.push_back(std::move(prov));
}

void MemoryBank::append(std::span<const PatchEmbedding> selected, const std::string& task_id,
                        std::int64_t sample_ord) {
    for (const auto& e : selected)
        if (e.vector.size() != static_cast<std::size_t>(dim_))
            throw DimMismatch(dim_, e.vector.size());
    for (const auto& e : selected) append(e.vector, Provenance{task_id, sample_ord});
}

void MemoryBank::truncate(std::size_t count) {
    if (count >= size()) return;
    data_.resize(count * dim_);
    provenance_.resize(count);
}

void SelectionBudget::validate() const {
    if (!(min_distance >= 0.0)) throw InvalidInput("min_distance must be >= 0");
}

double squared_distance(std::span<const float> a, std::span<const float> b) {
    double sum = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = static_cast<double>(a[i]) - static_cast<double>(b[i]);
        sum += d * d;
    }
    return sum;
}

Match distance_to_bank(std::span<const float> p, const MemoryBank& bank) {
    if (bank.empty()) throw EmptyBank();
    if (p.size() != static_cast<std::size_t>(bank.dim())) throw DimMismatch(bank.dim(), p.size());
    Match best{std::numeric_limits<double>::infinity(), 0};
    for (std::size_t i = 0; i < bank.size(); ++i) {
        const double d = squared_distance(p, bank.entry(i));
        if (d < best.distance) best = {d, i};
    }
    return best;
}

Match nearest_neighbor(std::span<const float> query, const MemoryBank& bank) {
    Match m = distance_to_bank(query, bank);
    m.distance = std::sqrt(m.distance);
    return m;
}

Selection incremental_kcenter_select(const EmbeddingSet& candidates, const MemoryBank& bank,
                                     const SelectionBudget& budget) {
    budget.validate();
    if (candidates.dim() != bank.dim() && !(bank.empty() && bank.dim() == 0))
        throw DimMismatch(bank.dim(), candidates.dim());

    Selection sel;
    const std::size_t n = candidates.size();
    if (budget.max_new == 0 || n == 0) return sel;

    // Running squared distance of each candidate to bank ∪ picks; negative
    // marks a candidate that has already been picked.
    std::vector<double> nearest(n, std::numeric_limits<double>::infinity());
    sel.scratch_bytes = nearest.capacity() * sizeof(double);
    if (!bank.empty()) {
        parallel_for(n, [&](std::size_t i) {
            nearest[i] = distance_to_bank(candidates.at(i), bank).distance;
        });
    }

    constexpr double kTaken = -1.0;
    while (sel.picks.size() < budget.max_new) {
        std::size_t best = n;
        if (bank.empty() && sel.picks.empty()) {
            double best_norm = -1.0;
            for (std::size_t i = 0; i < n; ++i) {
                double norm = 0.0;
                for (float v : candidates.at(i)) norm += static_cast<double>(v) * v;
                if (norm > best_norm) {
                    best_norm = norm;
                    best = i;
                }
            }
        } else {
            double best_d = kTaken;
            for (std::size_t i = 0; i < n; ++i)
                if (nearest[i] > best_d) {
                    best_d = nearest[i];
                    best = i;
                }
        }
        if (best == n || nearest[best] < budget.min_distance) break;

        sel.distances.push_back(nearest[best]);
        sel.candidate_indices.push_back(best);
        sel.picks.push_back(candidates.embedding(best));
        nearest[best] = kTaken;
        const auto picked = candidates.at(best);
        for (std::size_t i = 0; i < n; ++i)
            if (nearest[i] != kTaken)
                nearest[i] = std::min(nearest[i], squared_distance(candidates.at(i), picked));
    }
    sel.scratch_bytes += sel.picks.size() * (sizeof(PatchEmbedding) + candidates.dim() * sizeof(float)) +
                         sel.distances.capacity() * sizeof(double) +
                         sel.candidate_indices.capacity() * sizeof(std::size_t);
    return sel;
}

MemoryBank offline_greedy_coreset(std::span<const EmbeddingSet> pool, std::size_t k,
                                  std::uint64_t seed) {
    if (k == 0) throw InvalidInput("coreset size k must be >= 1");
    struct Ref {
        std::size_t set;
        std::size_t cell;
    };
    std::vector<Ref> points;
    int dim = -1;
    for (std::size_t s = 0; s < pool.size(); ++s) {
        if (pool[s].empty()) continue;
        if (dim < 0) dim = pool[s].dim();
        if (pool[s].dim() != dim) throw DimMismatch(dim, pool[s].dim());
        for (std::size_t c = 0; c < pool[s].size(); ++c) points.push_back({s, c});
    }
    if (points.empty()) throw InvalidInput("coreset pool holds no embeddings");

    MemoryBank bank(dim);
    auto add = [&](const Ref& r) {
        bank.append(pool[r.set].at(r.cell),
                    Provenance{pool[r.set].source_id(), static_cast<std::int64_t>(r.set)});
    };
    const std::size_t n = points.size();
    if (k >= n) {
        for (const auto& r : points) add(r);
        return bank;
    }

    auto vec = [&](std::size_t i) { return pool[points[i].set].at(points[i].cell); };
    SplitMix64 rng(seed);
    std::size_t center = static_cast<std::size_t>(rng.below(n));
    std::vector<double> nearest(n, std::numeric_limits<double>::infinity());
    constexpr double kTaken = -1.0;
    for (std::size_t picked = 0; picked < k; ++picked) {
        add(points[center]);
        nearest[center] = kTaken;
        const auto c = vec(center);
        parallel_for(n, [&](std::size_t i) {
            if (nearest[i] != kTaken) nearest[i] = std::min(nearest[i], squared_distance(vec(i), c));
        });
        double best_d = kTaken;
        for (std::size_t i = 0; i < n; ++i)
            if (nearest[i] > best_d) {
                best_d = nearest[i];
                center = i;
            }
    }
    return bank;
}

void baseline_subsample_append(std::span<const EmbeddingSet> pool, double ratio,
                               std::uint64_t seed, MemoryBank& bank, const std::string& task_id,
                               std::int64_t sample_ord) {
    if (!(ratio > 0.0 && ratio <= 1.0)) throw InvalidInput("subsampling ratio must be in (0, 1]");
    std::size_t n = 0;
    for (const auto& s : pool) {
        if (!s.empty() && s.dim() != bank.dim()) throw DimMismatch(bank.dim(), s.dim());
        n += s.size();
    }
    if (n == 0) throw InvalidInput("baseline pool holds no embeddings");
    // The epsilon keeps products such as 0.07·100 from rounding up past 7.
    const auto k = static_cast<std::size_t>(std::ceil(ratio * static_cast<double>(n) - 1e-9));
    const MemoryBank picked = offline_greedy_coreset(pool, std::max<std::size_t>(k, 1), seed);
    BankTransaction tx(bank);
    for (std::size_t i = 0; i < picked.size(); ++i)
        bank.append(picked.entry(i), Provenance{task_id, sample_ord});
    tx.commit();
}

// --- CGMB -------------------------------------------------------------------

namespace {
constexpr std::string_view kBankMagic = "CGMB";
constexpr std::uint32_t kBankVersion = 1;

std::string provenance_json(const MemoryBank& bank) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& p : bank.provenance())
        arr.push_back({{"task_id", p.task_id}, {"sample_ord", p.sample_ord}});
    return arr.dump();
}
}  // namespace

std::string encode_bank(const MemoryBank& bank) {
    std::string out;
    const std::string trailer = provenance_json(bank);
    out.reserve(kBankHeaderBytes + bank.data().size() * 4 + trailer.size() + kBankFooterBytes);
    out.append(kBankMagic);
    detail::put_le<std::uint32_t>(out, kBankVersion);
    detail::put_le<std::uint32_t>(out, static_cast<std::uint32_t>(bank.dim()));
    detail::put_le<std::uint64_t>(out, bank.size());
    for (float v : bank.data()) detail::put_f32(out, v);
    out.append(trailer);
    detail::put_le<std::uint64_t>(out, trailer.size());
    return out;
}

MemoryBank decode_bank(std::string_view bytes) {
    detail::ByteReader in(bytes, "CGMB");
    if (in.remaining() < 4 || in.take(4) != kBankMagic) throw FormatError("CGMB: bad magic");
    const auto version = in.get<std::uint32_t>();
    if (version != kBankVersion)
        throw FormatError("CGMB: unsupported version " + std::to_string(version));
    const auto dim = in.get<std::uint32_t>();
    const auto count = in.get<std::uint64_t>();
    if (dim == 0) throw FormatError("CGMB: zero dimension");
    if (count > in.remaining() / (4ULL * dim)) throw FormatError("CGMB: truncated entry data");

    std::vector<float> data(count * dim);
    for (auto& v : data) v = in.get_f32();
    if (in.remaining() < kBankFooterBytes) throw FormatError("CGMB: missing footer");
    detail::ByteReader footer(bytes.substr(bytes.size() - kBankFooterBytes), "CGMB footer");
    const auto trailer_len = footer.get<std::uint64_t>();
    if (trailer_len != in.remaining() - kBankFooterBytes)
        throw FormatError("CGMB: trailer length does not match file size");

    nlohmann::json arr;
    try {
        arr = nlohmann::json::parse(in.take(trailer_len));
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("CGMB: bad provenance trailer: ") + e.what());
    }
    if (!arr.is_array() || arr.size() != count)
        throw FormatError("CGMB: provenance count does not match entry count");

    MemoryBank bank(static_cast<int>(dim));
    try {
        for (std::uint64_t i = 0; i < count; ++i) {
            const auto& rec = arr[i];
            bank.append(std::span<const float>(data.data() + i * dim, dim),
                        Provenance{rec.at("task_id").get<std::string>(),
                                   rec.at("sample_ord").get<std::int64_t>()});
        }
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("CGMB: bad provenance record: ") + e.what());
    }
    return bank;
}

void save_bank(const MemoryBank& bank, const std::filesystem::path& path) {
    detail::write_file(path, encode_bank(bank));
}

MemoryBank load_bank(const std::filesystem::path& path) {
    return decode_bank(detail::read_file(path));
}

}  // namespace corebank
