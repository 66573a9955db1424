#pragma once

#include <cstdint>

namespace corebank {

// SplitMix64 (Steele, Lea, Flood). Every seeded choice in the library goes
// through this generator so that runs are reproducible across platforms and
// standard library implementations.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    // Index in [0, bound). Plain modulo; the bias is below 2^-40 for every
    // bound this library uses.
    std::uint64_t below(std::uint64_t bound) { return next() % bound; }

    // Integer in [lo, hi].
    std::int64_t range(std::int64_t lo, std::int64_t hi) {
        return lo + static_cast<std::int64_t>(below(static_cast<std::uint64_t>(hi - lo + 1)));
    }

    // Real in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

private:
    std::uint64_t state_;
};

// Derives an independent stream seed from a parent seed and a label.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t label) {
    SplitMix64 g(seed ^ (label * 0xD1B54A32D192ED03ULL));
    g.next();
    return g.next();
}

}  // namespace corebank
