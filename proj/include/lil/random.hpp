// random.hpp
//
// Per-path random streams. Each path's generator is seeded from a 128-bit
// hash of (master_seed, path_index), so a path's increments depend only on
// those two numbers and never on scheduling.
#pragma once

#include <array>
#include <cstdint>
#include <random>

namespace lil {

/// SplitMix64 finalizer: a bijective 64-bit mixer.
inline constexpr std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

struct Seed128 {
    std::uint64_t hi = 0;
    std::uint64_t lo = 0;
    bool operator==(const Seed128&) const = default;
};

/// 128-bit hash of (master_seed, index): two chained SplitMix64 lanes.
inline constexpr Seed128 path_seed(std::uint64_t master_seed, std::uint64_t index) {
    const std::uint64_t a = splitmix64(master_seed ^ splitmix64(index));
    const std::uint64_t b = splitmix64(a ^ 0x6a09e667f3bcc909ULL ^ splitmix64(index + 0x9e3779b97f4a7c15ULL));
    return {a, b};
}

/// A path-private stream: mt19937_64 seeded from a Seed128, plus a bit
/// buffer so that each fair sign costs one bit rather than one draw.
class RandomStream {
public:
    explicit RandomStream(Seed128 seed) {
        std::seed_seq seq{static_cast<std::uint32_t>(seed.hi >> 32), static_cast<std::uint32_t>(seed.hi),
                          static_cast<std::uint32_t>(seed.lo >> 32), static_cast<std::uint32_t>(seed.lo)};
        engine_.seed(seq);
    }
    explicit RandomStream(std::uint64_t seed) : RandomStream(path_seed(seed, 0)) {}

    std::uint64_t next_u64() { return engine_(); }

    /// +1 or -1 with probability 1/2 each.
    int sign() {
        if (bits_left_ == 0) {
            bits_ = engine_();
            bits_left_ = 64;
        }
        const int s = (bits_ & 1ULL) ? 1 : -1;
        bits_ >>= 1;
        --bits_left_;
        return s;
    }

    /// Uniform on [0, 1) with 53 random bits.
    double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    /// Uniform on (0, 1).
    double uniform_open() {
        double x;
        do x = uniform01();
        while (x == 0.0);
        return x;
    }

private:
    std::mt19937_64 engine_;
    std::uint64_t bits_ = 0;
    int bits_left_ = 0;
};

}  // namespace lil
