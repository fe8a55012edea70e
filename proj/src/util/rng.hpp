#pragma once

#include <cstdint>
#include <random>
#include <string>

namespace iothp::util {

// Seeded RNG used everywhere determinism matters. std::mt19937_64 output is
// specified by the standard; the derived draws below avoid std distributions,
// whose results vary between standard library implementations.
class Rng {
public:
    explicit Rng(uint64_t seed) : engine_(seed) {}

    uint64_t next_u64() { return engine_(); }

    // Uniform index in [0, n). Modulo bias is negligible for the small n used here.
    size_t index(size_t n) { return n == 0 ? 0 : static_cast<size_t>(engine_() % n); }

    // Uniform double in [0, 1) with 53 bits of precision.
    double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    // Uniform integer in [lo, hi] inclusive.
    int64_t range(int64_t lo, int64_t hi) {
        if (hi <= lo) return lo;
        return lo + static_cast<int64_t>(engine_() % static_cast<uint64_t>(hi - lo + 1));
    }

private:
    std::mt19937_64 engine_;
};

// Derives an independent child seed from a base seed and a label, e.g. one
// stream per simulated actor.
inline uint64_t derive_seed(uint64_t base, const std::string& label) {
    uint64_t h = 1469598103934665603ULL ^ base;
    for (unsigned char c : label) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

}  // namespace iothp::util
