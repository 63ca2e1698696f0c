#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <vector>

namespace buffgraph {

/// Deterministic random generator (splitmix64 core).
///
/// The standard library leaves std::shuffle and the distribution classes
/// implementation-defined, so seeded runs would not reproduce across
/// toolchains. Everything here is spelled out explicitly: the same seed
/// yields the same stream everywhere.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    /// Independent stream keyed by (seed, a, b, c). Streams never share
    /// state, so per-row / per-class draws are order-independent.
    static Rng stream(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0,
                      std::uint64_t c = 0) {
        std::uint64_t s = mix(seed ^ 0x8c95a4d4f3b2e1c7ull);
        s = mix(s ^ mix(a));
        s = mix(s ^ mix(b));
        s = mix(s ^ mix(c));
        return Rng(s);
    }

    std::uint64_t next_u64() {
        state_ += 0x9e3779b97f4a7c15ull;
        return mix(state_);
    }

    /// Uniform double in [0, 1).
    double uniform() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    /// Uniform integer in [0, n). n must be positive.
    std::int64_t uniform_int(std::int64_t n) {
        return static_cast<std::int64_t>(
            (static_cast<unsigned __int128>(next_u64()) *
             static_cast<unsigned __int128>(n)) >> 64);
    }

    /// Standard normal via Box-Muller (no cached spare; two uniforms per call).
    double gaussian() {
        double u1 = 1.0 - uniform(); // (0, 1], keeps log finite
        double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) *
               std::cos(2.0 * std::numbers::pi * u2);
    }

    /// Fisher-Yates shuffle.
    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::size_t j = static_cast<std::size_t>(
                uniform_int(static_cast<std::int64_t>(i)));
            std::swap(v[i - 1], v[j]);
        }
    }

private:
    static std::uint64_t mix(std::uint64_t x) {
        x += 0x9e3779b97f4a7c15ull;
        x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
        x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
        return x ^ (x >> 31);
    }

    std::uint64_t state_;
};

} // namespace buffgraph
