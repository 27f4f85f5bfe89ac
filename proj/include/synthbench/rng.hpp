#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <string_view>

#include "synthbench/stats.hpp"

namespace synthbench {

// Deterministic random source. All randomness in the library flows through
// this wrapper so that a seed fully reproduces a run; std::* distributions
// are avoided because their output is implementation-defined.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    std::uint64_t next_u64() { return gen_(); }

    // Uniform on the open interval (0,1).
    double uniform01() {
        return (static_cast<double>(gen_() >> 11) + 0.5) * 0x1p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    double normal() { return norm_quantile(uniform01()); }

    // Integer in [0, n). n must be positive.
    std::size_t uniform_index(std::size_t n) {
        return static_cast<std::size_t>(gen_() % static_cast<std::uint64_t>(n));
    }

private:
    std::mt19937_64 gen_;
};

// FNV-1a. Used to derive per-cell seeds from human-readable coordinates.
inline std::uint64_t stable_hash64(std::string_view s) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

inline std::uint64_t stable_hash64(std::uint64_t seed, std::string_view key) {
    std::string buf = std::to_string(seed);
    buf += '/';
    buf += key;
    return stable_hash64(buf);
}

}  // namespace synthbench
