#pragma once

#include <cstdint>
#include <initializer_list>

namespace gapcore {

/// SplitMix64 generator (Steele, Lea & Flood 2014). Small, fast and stable
/// across platforms and standard-library versions, which keeps every seeded
/// artifact byte-reproducible. Not for cryptographic use.
class Rng {
public:
    explicit Rng(uint64_t seed) : state_(seed) {}

    uint64_t next_u64() {
        uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    /// Uniform double in [0, 1) with 53 random bits.
    double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

    /// Uniform integer in [0, n). Uses the multiply-shift reduction, which is
    /// close enough to unbiased for the small n used here.
    int uniform_int(int n) {
        return static_cast<int>((static_cast<unsigned __int128>(next_u64()) *
                                 static_cast<unsigned __int128>(n)) >> 64);
    }

private:
    uint64_t state_;
};

namespace detail {
inline uint64_t splitmix_fin(uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}
} // namespace detail

/// Derives an independent substream seed from a base seed and a key tuple
/// (e.g. node index, action, sweep). Each component passes through the
/// SplitMix64 finalizer so that streams for neighbouring keys are
/// decorrelated. This is what makes parallel sweeps deterministic: the
/// stream for a (node, action, sweep) cell does not depend on which worker
/// evaluates it or in which order.
inline uint64_t derive_stream(uint64_t seed, std::initializer_list<uint64_t> keys) {
    uint64_t h = detail::splitmix_fin(seed + 0x9e3779b97f4a7c15ULL);
    for (uint64_t k : keys) h = detail::splitmix_fin(h ^ (k + 0x9e3779b97f4a7c15ULL));
    return h;
}

} // namespace gapcore
