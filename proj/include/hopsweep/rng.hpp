#pragma once

// Portable, reproducible random streams.
//
// The engine is std::mt19937_64, whose output sequence is fixed by the
// standard. Distributions are done by hand because the standard library
// distributions are implementation-defined. Independent streams are derived
// from a (seed, purpose, index) triple through the splitmix64 finalizer.

#include <cstdint>
#include <random>

namespace hopsweep {

enum class StreamPurpose : std::uint64_t {
    state_init = 1,
    transverse_noise = 2,
    test_data = 3,
};

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    /// Stream for one purpose of one run; `index` is the restart number.
    static Rng stream(std::uint64_t seed, StreamPurpose purpose, std::uint64_t index = 0) {
        std::uint64_t s = splitmix64(seed);
        s = splitmix64(s ^ static_cast<std::uint64_t>(purpose));
        s = splitmix64(s ^ index);
        return Rng(s);
    }

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    /// Uniform integer in [0, n); n > 0. Rejection sampling, no modulo bias.
    std::uint64_t below(std::uint64_t n) {
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t x;
        do {
            x = engine_();
        } while (x >= limit);
        return x % n;
    }

private:
    std::mt19937_64 engine_;
};

}  // namespace hopsweep
