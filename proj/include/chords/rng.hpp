#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace chords {

/**
 * Counter-based SplitMix64 stream.
 *
 * Every value is a pure function of (seed, counter), so identical seeds
 * reproduce identical streams on any platform and draws can be indexed
 * without sequential state. This is the single generator family used for
 * all seeded fixtures (network weights, noise draws, per-run seeds); the
 * exact recipe is documented in the README so other implementations can
 * reproduce the fixtures bit for bit.
 */
struct SplitMix64 {
    std::uint64_t seed = 0;
    std::uint64_t counter = 0;

    explicit SplitMix64(std::uint64_t s) : seed(s) {}

    static std::uint64_t mix(std::uint64_t z) {
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    static std::uint64_t at(std::uint64_t seed, std::uint64_t index) {
        return mix(seed + 0x9E3779B97F4A7C15ull * (index + 1));
    }

    std::uint64_t next_u64() { return at(seed, counter++); }

    // uniform in [0, 1) with 53 random bits
    double next_uniform() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // standard normal via Box-Muller on two counter draws
    double next_normal() {
        double u1 = next_uniform();
        double u2 = next_uniform();
        if (u1 <= 0.0) u1 = 0x1.0p-53;
        return std::sqrt(-2.0 * std::log(u1)) *
               std::cos(2.0 * std::numbers::pi * u2);
    }
};

// Fixed splitting rule: run r of master seed m draws from stream (m, r).
inline std::uint64_t split_seed(std::uint64_t master, std::uint64_t run_index) {
    return SplitMix64::at(master, run_index);
}

}  // namespace chords
