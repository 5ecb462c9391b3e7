#ifndef ELENS_DIGEST_HPP
#define ELENS_DIGEST_HPP

#include <cstdint>
#include <string_view>

namespace elens {

// 64-bit FNV-1a. Not cryptographic; used for change-detection digests in
// manifests and model files.
inline constexpr std::uint64_t kFnvOffset = 14695981039346656037ull;
inline constexpr std::uint64_t kFnvPrime = 1099511628211ull;

inline std::uint64_t fnv1a(std::string_view data, std::uint64_t seed = kFnvOffset) {
    std::uint64_t h = seed;
    for (unsigned char c : data) {
        h ^= c;
        h *= kFnvPrime;
    }
    return h;
}

} // namespace elens

#endif
