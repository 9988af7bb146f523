#pragma once

#include <cstdint>
#include <string_view>

namespace avowqc {

// Counter-based deterministic generator (SplitMix64 over seed + counter).
// Every stochastic component owns one stream; identical seeds reproduce
// identical draw sequences on every platform, which is what makes saved
// transcripts replayable bit for bit.
class CounterRng {
public:
    explicit CounterRng(uint64_t seed) : seed_(seed) {}

    uint64_t next_u64() {
        uint64_t z = seed_ + (++counter_) * 0x9E3779B97F4A7C15ULL;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    // Uniform in [0, 1) with 53 bits of precision.
    double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    int next_bit() { return static_cast<int>(next_u64() >> 63); }

    // Uniform integer in [0, bound). bound must be > 0.
    uint64_t next_below(uint64_t bound) {
        // Rejection sampling to avoid modulo bias.
        const uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
        uint64_t v;
        do {
            v = next_u64();
        } while (v >= limit);
        return v % bound;
    }

    uint64_t seed() const { return seed_; }
    uint64_t draws() const { return counter_; }

private:
    uint64_t seed_;
    uint64_t counter_ = 0;
};

// Derives an independent child seed from a master seed, a purpose label and
// an index. Used to give each register, party and subsystem its own stream.
inline uint64_t derive_seed(uint64_t master, std::string_view label, uint64_t index = 0) {
    uint64_t h = 0xCBF29CE484222325ULL;  // FNV-1a over the label
    for (char c : label) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001B3ULL;
    }
    uint64_t z = master ^ h;
    z += 0x9E3779B97F4A7C15ULL * (index + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

}  // namespace avowqc
