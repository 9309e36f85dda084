#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace cmrp {

// 64-bit finalizer used for seed derivation. Consecutive inputs (seed + index)
// map to well-separated engine seeds, so per-instance streams do not depend on
// the order instances are generated in.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

// mt19937_64 with hand-rolled distributions. The standard pins the engine's
// output sequence exactly, but std::uniform_*_distribution is implementation
// defined; rolling the mappings here keeps generated bytes identical across
// toolchains, which the determinism contracts require.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(splitmix64(seed)) {}

    // Stream for the index-th item drawn from a base seed.
    static Rng for_index(std::uint64_t seed, std::uint64_t index) {
        return Rng(seed + index);
    }

    std::uint64_t next_u64() { return engine_(); }

    // Uniform double in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Unbiased integer in [0, bound). bound must be positive.
    std::uint64_t uniform_int(std::uint64_t bound) {
        const std::uint64_t threshold = (0 - bound) % bound;
        for (;;) {
            const std::uint64_t r = next_u64();
            if (r >= threshold) return r % bound;
        }
    }

    // Standard normal via Box-Muller; one value per call.
    double normal() {
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
    }

private:
    std::mt19937_64 engine_;
};

}  // namespace cmrp
