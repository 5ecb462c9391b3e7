#ifndef ELENS_RNG_HPP
#define ELENS_RNG_HPP

#include <cstdint>
#include <limits>
#include <random>
#include <vector>

#include "elens/digest.hpp"

namespace elens {

// Deterministic helpers on top of mt19937_64. std::uniform_* distributions
// are implementation-defined, so anything affecting output bytes goes through
// these instead.

// Uniform in [0, 1) with 53 random bits.
inline double uniform01(std::mt19937_64& rng) {
    return double(rng() >> 11) * 0x1.0p-53;
}

inline double uniform_in(std::mt19937_64& rng, double lo, double hi) {
    return lo + (hi - lo) * uniform01(rng);
}

// Unbiased integer in [0, n) by rejection.
inline std::uint64_t uniform_index(std::mt19937_64& rng, std::uint64_t n) {
    if (n <= 1) return 0;
    std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - (~n + 1) % n;
    std::uint64_t v;
    do {
        v = rng();
    } while (v > limit);
    return v % n;
}

template <typename T>
void shuffle_fy(std::vector<T>& v, std::mt19937_64& rng) {
    for (std::size_t i = v.size(); i > 1; --i) {
        std::size_t j = std::size_t(uniform_index(rng, i));
        std::swap(v[i - 1], v[j]);
    }
}

// Stage-specific seed derived from the run seed, so one --seed reproduces
// every stage without coupling their streams.
inline std::uint64_t derive_seed(std::uint64_t seed, std::string_view stage) {
    std::uint64_t h = fnv1a(stage);
    return seed ^ h;
}

} // namespace elens

#endif
