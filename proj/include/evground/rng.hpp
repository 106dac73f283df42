#pragma once

#include <cmath>
#include <cstdint>

namespace evg {

// Deterministic seeded generator (splitmix64). Used instead of <random>
// distributions so that seeded runs produce identical bytes on every
// platform and standard library.
class Rng {
public:
    explicit Rng(uint64_t seed) : state_(seed) {}

    uint64_t next_u64() {
        uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    // uniform in [0, 1) with 53-bit resolution
    double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    bool bernoulli(double p) { return uniform01() < p; }

    // uniform integer in [0, bound); bound >= 1
    uint64_t below(uint64_t bound) {
        // rejection sampling keeps this exactly uniform
        uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
        uint64_t draw;
        do {
            draw = next_u64();
        } while (draw >= limit);
        return draw % bound;
    }

    // standard normal via Box-Muller (one value per call, no caching)
    double gaussian() {
        double u1;
        do {
            u1 = uniform01();
        } while (u1 <= 0.0);
        double u2 = uniform01();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
    }

private:
    uint64_t state_;
};

} // namespace evg
