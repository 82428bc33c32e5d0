#pragma once

#include <cstdint>

namespace biharm {

/// Counter-based generator: the k-th draw of stream s under seed is a pure
/// function of (seed, s, k), so pair i can be generated without touching
/// pairs 0..i-1.
class CounterRng {
public:
    CounterRng(std::uint64_t seed, std::uint64_t stream) noexcept
        : key_(mix(mix(seed ^ 0x6a09e667f3bcc909ULL) + stream * 0x9e3779b97f4a7c15ULL)) {}

    std::uint64_t next_u64() noexcept { return mix(key_ + 0xbb67ae8584caa73bULL * ++counter_); }

    /// Uniform double in [0, 1).
    double uniform() noexcept { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }

    static std::uint64_t mix(std::uint64_t z) noexcept {
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

} // namespace biharm
