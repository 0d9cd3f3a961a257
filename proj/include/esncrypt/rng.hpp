#pragma once

// Deterministic pseudo-random generation for key material.
//
// Key expansion has to reproduce identical weight matrices from identical
// seeds on every platform, so fixed-constant integer generators are used
// (SplitMix64 to expand the seed, xoshiro256** as the stream) rather than
// the standard library engines, whose distributions are not pinned across
// implementations. The draw order consumed from a stream is part of the
// key format contract.

#include <cstdint>

namespace esncrypt {

/// SplitMix64 (Steele/Lea/Flood); golden-ratio increment, Stafford mix 13.
struct SplitMix64 {
    std::uint64_t state;

    explicit SplitMix64(std::uint64_t seed) : state(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state += 0x9E3779B97F4A7C15ull);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }
};

/// xoshiro256** 1.0 (Blackman/Vigna), state seeded via SplitMix64.
class Xoshiro256 {
public:
    explicit Xoshiro256(std::uint64_t seed) {
        SplitMix64 sm(seed);
        for (auto& word : state_) word = sm.next();
    }

    std::uint64_t next() {
        const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    /// Uniform on [0, 1): top 53 bits scaled by 2^-53.
    double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    /// Uniform on [-scale, scale).
    double uniform_symmetric(double scale) { return (2.0 * uniform01() - 1.0) * scale; }

    bool bernoulli(double p) { return uniform01() < p; }

    /// Unbiased uniform integer in [0, bound), bound > 0.
    std::uint64_t below(std::uint64_t bound) {
        const std::uint64_t threshold = -bound % bound;
        for (;;) {
            const std::uint64_t r = next();
            if (r >= threshold) return r % bound;
        }
    }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) {
        return (x << k) | (x >> (64 - k));
    }

    std::uint64_t state_[4];
};

}  // namespace esncrypt
