#pragma once
#include <cmath>
#include <cstdint>
#include <string_view>

namespace dcuprl {

/**
 * Deterministic RNG with named substreams.
 *
 * All randomness in a run flows from one 64-bit master seed. Consumers
 * (env resets, action noise, replay sampling, crop augmentation, ...)
 * each derive an independent substream keyed by a name and an optional
 * index, so adding a new consumer never shifts the draws seen by the
 * existing ones. Splitting and generation are both splitmix64-based,
 * which is plenty for simulation use and is byte-stable across platforms.
 */
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    static std::uint64_t mix(std::uint64_t z) {
        z += 0x9e3779b97f4a7c15ull;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    static std::uint64_t hash_name(std::string_view name) {
        std::uint64_t h = 0xcbf29ce484222325ull; // FNV-1a
        for (char c : name) {
            h ^= static_cast<unsigned char>(c);
            h *= 0x100000001b3ull;
        }
        return h;
    }

    /// Independent substream of `master` keyed by (name, index).
    static Rng substream(std::uint64_t master, std::string_view name, std::uint64_t index = 0) {
        return Rng(mix(mix(master ^ hash_name(name)) + index));
    }

    std::uint64_t next_u64() {
        state_ += 0x9e3779b97f4a7c15ull;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    /// Uniform double in [0, 1).
    double uniform() {
        return (next_u64() >> 11) * 0x1.0p-53;
    }

    /// Uniform double in [lo, hi).
    double uniform(double lo, double hi) {
        return lo + (hi - lo) * uniform();
    }

    /// Uniform integer in [0, n).
    std::uint64_t uniform_int(std::uint64_t n) {
        // n is tiny relative to 2^64 everywhere this is used; modulo bias
        // is below 2^-50 and irrelevant for simulation draws.
        return next_u64() % n;
    }

    /// Standard normal via Box-Muller.
    double normal() {
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586477 * u2);
    }

private:
    std::uint64_t state_;
};

} // namespace dcuprl
