#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace esncast {

/// Mixes a seed with a salt into a fresh substream seed (splitmix64 step).
inline uint64_t mix_seed(uint64_t seed, uint64_t salt) {
    uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (salt + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Deterministic RNG. std::mt19937_64 has a standardized sequence, and the
/// uniform/normal transforms below are plain IEEE arithmetic, so a given seed
/// reproduces the same stream on every platform (std::*_distribution would
/// not, its algorithm is implementation-defined).
class Rng {
public:
    explicit Rng(uint64_t seed) : seed_(seed), gen_(seed) {}

    uint64_t seed() const { return seed_; }

    uint64_t next_u64() { return gen_(); }

    /// Uniform on [0, 1) with 53-bit resolution.
    double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

    double uniform(double a, double b) { return a + (b - a) * uniform(); }

    /// Uniform integer on [0, n). Modulo bias is irrelevant for n << 2^64.
    uint64_t uniform_index(uint64_t n) { return gen_() % n; }

    /// Standard normal via Box-Muller (cosine branch only; two u64 per draw).
    double normal() {
        double u1 = uniform();
        if (u1 <= 0.0) u1 = 0x1.0p-53;
        double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
    }

    /// Independent substream keyed on (seed, salt); advancing one stream never
    /// perturbs another.
    Rng derive(uint64_t salt) const { return Rng(mix_seed(seed_, salt)); }

private:
    uint64_t seed_;
    std::mt19937_64 gen_;
};

}  // namespace esncast
