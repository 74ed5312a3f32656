#pragma once

#include <cmath>
#include <cstdint>
#include <string_view>

namespace diffuse {

// Deterministic random streams. Every consumer derives its own stream from
// (global seed, stream tag, index), so parallel workers never contend for a
// shared generator and results are independent of scheduling order.

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (char c : s) {
        h ^= static_cast<std::uint8_t>(c);
        h *= 0x100000001b3ULL;
    }
    return h;
}

}  // namespace detail

// xoshiro256++ seeded via splitmix64. Plain value type; copy freely.
class StreamRng {
public:
    StreamRng() : StreamRng(0) {}

    explicit StreamRng(std::uint64_t seed) {
        std::uint64_t sm = seed;
        for (auto& word : state_) word = detail::splitmix64(sm);
    }

    // Stream derivation: (seed, tag, index) -> independent generator.
    StreamRng(std::uint64_t seed, std::string_view tag, std::uint64_t index = 0)
        : StreamRng(mix(seed, detail::fnv1a(tag), index)) {}

    std::uint64_t next_u64() {
        const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    // Uniform in (0, 1); never returns 0, so it is safe under log().
    double next_unit() {
        return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
    }

    // Standard normal via Box-Muller (no cached spare: one draw per call
    // keeps the consumption pattern obvious and reproducible).
    double next_normal() {
        const double u = next_unit();
        const double v = next_unit();
        return std::sqrt(-2.0 * std::log(u)) * std::cos(6.283185307179586477 * v);
    }

    // Uniform integer in [0, n).
    std::uint64_t next_below(std::uint64_t n) { return next_u64() % n; }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) {
        return (x << k) | (x >> (64 - k));
    }
    static std::uint64_t mix(std::uint64_t seed, std::uint64_t tag, std::uint64_t index) {
        std::uint64_t sm = seed;
        std::uint64_t a = detail::splitmix64(sm);
        sm = a ^ tag;
        std::uint64_t b = detail::splitmix64(sm);
        sm = b ^ (index * 0x9e3779b97f4a7c15ULL + 0x632be59bd9b4e019ULL);
        return detail::splitmix64(sm);
    }

    std::uint64_t state_[4];
};

}  // namespace diffuse
