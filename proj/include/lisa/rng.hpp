#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace lisa {

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

} // namespace detail

// Counter-based generator: every draw is a pure function of
// (seed, cycle, source-id). Sources can be sampled in any order, in parallel,
// or not at all without disturbing each other's values, which is what makes
// traces reproducible and order-independent.
struct CounterSampler {
    std::uint64_t seed = 0;

    double uniform(std::uint64_t cycle, std::string_view source) const {
        std::uint64_t h = detail::splitmix64(seed ^ 0x5851F42D4C957F2DULL);
        h = detail::splitmix64(h ^ cycle);
        // FNV-1a over the source id, folded through splitmix for avalanche.
        std::uint64_t f = 1469598103934665603ULL;
        for (char c : source) {
            f ^= static_cast<unsigned char>(c);
            f *= 1099511628211ULL;
        }
        h = detail::splitmix64(h ^ f);
        return static_cast<double>(h >> 11) * 0x1.0p-53;
    }
};

// Derives an independent 64-bit stream seed for episode-style workloads.
inline std::uint64_t derive_stream(std::uint64_t seed, std::uint64_t index) {
    return detail::splitmix64(detail::splitmix64(seed) ^ detail::splitmix64(index * 0xA24BAED4963EE407ULL + 1));
}

} // namespace lisa
