#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace lfcycle {

inline uint64_t splitmix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

/// Deterministic random source. All draws are derived from mt19937_64 with
/// hand-rolled conversions so results are identical across platforms.
class RandomSource {
public:
    explicit RandomSource(uint64_t seed) : engine_(seed) {}

    uint64_t next_u64() { return engine_(); }

    /// Uniform in [0, 1).
    double uniform() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Uniform integer in [lo, hi], inclusive.
    int uniform_int(int lo, int hi) {
        if (hi <= lo) return lo;
        uint64_t span = static_cast<uint64_t>(hi - lo) + 1;
        return lo + static_cast<int>(next_u64() % span);
    }

    /// Standard normal via Box-Muller; draws two uniforms per call (no cached
    /// second value, so the stream stays position-independent).
    double normal() {
        double u1 = 1.0 - uniform();
        double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
    }

    /// Derive an independent sub-stream.
    RandomSource fork(uint64_t stream) {
        return RandomSource(splitmix64(next_u64() ^ splitmix64(stream)));
    }

private:
    std::mt19937_64 engine_;
};

} // namespace lfcycle
