#pragma once

#include <cmath>
#include <cstdint>

namespace aclab::rng {

// Stateless counter-based randomness. Every draw is a pure function of the
// key words, so results do not depend on evaluation order or on how work is
// partitioned across threads.

inline constexpr uint64_t kGamma = 0x9e3779b97f4a7c15ULL;

inline uint64_t mix64(uint64_t x) {
    x ^= x >> 30;
    x *= 0xbf58476d1ce4e5b9ULL;
    x ^= x >> 27;
    x *= 0x94d049bb133111ebULL;
    x ^= x >> 31;
    return x;
}

inline uint64_t word(uint64_t seed, uint64_t a, uint64_t b = 0, uint64_t c = 0,
                     uint64_t d = 0) {
    uint64_t h = mix64(seed + kGamma);
    h = mix64(h ^ (a + kGamma));
    h = mix64(h ^ (b + kGamma));
    h = mix64(h ^ (c + kGamma));
    h = mix64(h ^ (d + kGamma));
    return h;
}

// Uniform in [0, 1), 53-bit resolution.
inline double uniform01(uint64_t seed, uint64_t a, uint64_t b = 0,
                        uint64_t c = 0, uint64_t d = 0) {
    return static_cast<double>(word(seed, a, b, c, d) >> 11) * 0x1.0p-53;
}

// Uniform in (0, 1]; safe to feed into log().
inline double uniformOpen01(uint64_t seed, uint64_t a, uint64_t b = 0,
                            uint64_t c = 0, uint64_t d = 0) {
    return static_cast<double>((word(seed, a, b, c, d) >> 11) + 1) * 0x1.0p-53;
}

// Uniform in [lo, hi]. Degenerate ranges return lo exactly.
inline double uniformRange(double lo, double hi, uint64_t seed, uint64_t a,
                           uint64_t b = 0, uint64_t c = 0, uint64_t d = 0) {
    return lo + uniform01(seed, a, b, c, d) * (hi - lo);
}

// Standard normal via Box-Muller on two decorrelated lanes of the same key.
inline double normal(uint64_t seed, uint64_t a, uint64_t b = 0, uint64_t c = 0) {
    const double u1 = uniformOpen01(seed, a, b, c, 0x8b72e0a5f739cc21ULL);
    const double u2 = uniform01(seed, a, b, c, 0x41c64e6da3bc0074ULL);
    constexpr double twoPi = 6.283185307179586476925286766559;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(twoPi * u2);
}

// Unbiased integer in [0, bound) by 128-bit multiply-shift rejection.
inline uint64_t below(uint64_t bound, uint64_t seed, uint64_t a, uint64_t b = 0,
                      uint64_t c = 0) {
    uint64_t x = word(seed, a, b, c, 0x7b879e3ad5c8e361ULL);
    __uint128_t m = static_cast<__uint128_t>(x) * bound;
    uint64_t low = static_cast<uint64_t>(m);
    if (low < bound) {
        const uint64_t threshold = -bound % bound;
        uint64_t lane = 1;
        while (low < threshold) {
            x = word(seed, a, b, c, 0x7b879e3ad5c8e361ULL + lane);
            m = static_cast<__uint128_t>(x) * bound;
            low = static_cast<uint64_t>(m);
            ++lane;
        }
    }
    return static_cast<uint64_t>(m >> 64);
}

// Stream tags keep independent uses of the same user seed decorrelated.
namespace streams {
inline constexpr uint64_t kInit = 1;
inline constexpr uint64_t kShuffle = 2;
inline constexpr uint64_t kAugmentField = 3;
inline constexpr uint64_t kAugmentNoise = 4;
inline constexpr uint64_t kSampler = 5;
inline constexpr uint64_t kSubsample = 6;
inline constexpr uint64_t kBenchStream = 7;
inline constexpr uint64_t kSweepStream = 8;
inline constexpr uint64_t kAlignPick = 9;
inline constexpr uint64_t kAlignStream = 10;
inline constexpr uint64_t kDigits = 11;
inline constexpr uint64_t kPcaStart = 12;
}  // namespace streams

}  // namespace aclab::rng
