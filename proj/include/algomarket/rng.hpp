#pragma once

#include <cmath>
#include <cstdint>

namespace algomarket {

// splitmix64 step, used to expand seeds into generator state.
inline uint64_t splitmix64(uint64_t& state) {
    uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Deterministic combination of a base seed with a stream index.
inline uint64_t derive_seed(uint64_t seed, uint64_t index) {
    uint64_t s = seed ^ index;
    return splitmix64(s);
}

// xoshiro256** with splitmix64 seeding. The standard library engines and
// distributions are implementation-defined, so they cannot guarantee that a
// recorded seed replays to the same bytes everywhere; this generator can.
class Rng {
  public:
    explicit Rng(uint64_t seed) {
        uint64_t sm = seed;
        for (auto& word : state_) word = splitmix64(sm);
    }

    uint64_t next_u64() {
        const uint64_t result = rotl(state_[1] * 5, 7) * 9;
        const uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    // Unbiased draw from [0, bound); bound >= 1.
    uint64_t below(uint64_t bound) {
        const uint64_t threshold = (0 - bound) % bound;  // 2^64 mod bound
        for (;;) {
            const uint64_t r = next_u64();
            if (r >= threshold) return r % bound;
        }
    }

    // Inclusive integer range.
    uint64_t range(uint64_t lo, uint64_t hi) { return lo + below(hi - lo + 1); }

    int bit() { return static_cast<int>(next_u64() >> 63); }

    double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // Box-Muller; draws two uniforms per call and caches nothing, so the
    // stream position depends only on the number of calls.
    double normal() {
        constexpr double two_pi = 6.283185307179586476925286766559;
        double u1;
        do {
            u1 = uniform01();
        } while (u1 == 0.0);
        const double u2 = uniform01();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(two_pi * u2);
    }

  private:
    static uint64_t rotl(uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

    uint64_t state_[4];
};

}  // namespace algomarket
