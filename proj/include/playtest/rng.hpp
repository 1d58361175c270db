#pragma once

// Seeded randomness. std::mt19937_64 output is specified by the standard;
// the distributions below are hand-rolled because the std:: ones are not
// portable across library implementations.

#include <cstdint>
#include <limits>
#include <random>

namespace playtest {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

/// Seed for trial `index` of a batch.
inline std::uint64_t trial_seed(std::uint64_t base_seed, std::uint64_t index) { return base_seed ^ index; }

class Rng {
public:
    explicit Rng(std::uint64_t seed = 0) : engine_(splitmix64(seed)) {}

    std::uint64_t next() { return engine_(); }

    /// Uniform integer in [0, n). n must be positive.
    std::uint64_t uniform_index(std::uint64_t n) {
        if (n <= 1) return 0;
        // Rejection sampling keeps the draw exactly uniform.
        const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % n;
        std::uint64_t x;
        do {
            x = engine_();
        } while (x >= limit);
        return x % n;
    }

    /// Uniform real in [0, 1) with 53 random bits.
    double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    /// Independent stream derived from this one.
    Rng fork() { return Rng(engine_()); }

private:
    std::mt19937_64 engine_;
};

}  // namespace playtest
