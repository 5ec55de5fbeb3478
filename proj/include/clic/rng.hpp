#pragma once

#include <cstdint>

namespace clic {

/// Deterministic 64-bit generator (splitmix64 core). The same seed always
/// yields the same draw sequence, independent of platform or standard
/// library, so every pipeline stage can promise bit-identical reruns.
///
/// `derive(stream)` produces an independent generator keyed by the parent
/// seed and a stream index; derivation depends only on the seed, not on how
/// many values the parent has already drawn.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : seed_(seed), state_(seed) {}

    std::uint64_t seed() const { return seed_; }

    std::uint64_t next_u64() {
        state_ += 0x9e3779b97f4a7c15ULL;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    /// Uniform double in [0, 1).
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Uniform double in [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Uniform integer in [0, bound); bound must be >= 1.
    std::uint64_t uniform_int(std::uint64_t bound) {
        // Rejection sampling over the largest multiple of bound.
        const std::uint64_t limit = ~0ULL - ~0ULL % bound;
        std::uint64_t v;
        do {
            v = next_u64();
        } while (v >= limit);
        return v % bound;
    }

    bool bernoulli(double p) { return uniform() < p; }

    /// Standard normal draw (Box-Muller, one value per call pair kept
    /// internally would break seed-splitting, so both uniforms are drawn
    /// fresh each call).
    double gaussian();

    /// Independent child generator for a named stream (per image, per epoch,
    /// per step). Children with distinct stream ids never correlate.
    Rng derive(std::uint64_t stream) const { return Rng(seed_ ^ mix(stream)); }

private:
    static std::uint64_t mix(std::uint64_t z) {
        z += 0x9e3779b97f4a7c15ULL;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    std::uint64_t seed_;
    std::uint64_t state_;
};

}  // namespace clic
