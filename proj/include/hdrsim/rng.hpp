#pragma once

#include <cmath>
#include <cstdint>
#include <string_view>

namespace hdrsim {

// splitmix64 finalizer; the mixing core for stream derivation and output.
inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ull;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

// FNV-1a, used to fold stage names into seeds.
inline std::uint64_t hash_name(std::string_view s) {
    std::uint64_t h = 0xCBF29CE484222325ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001B3ull;
    }
    return h;
}

inline std::uint64_t derive_seed(std::uint64_t master, std::string_view stage) {
    return mix64(master ^ hash_name(stage));
}

// A self-contained random stream. Streams are derived, not split: keying a
// stream by (seed, index, capture, stage) makes every consumer independent
// of scheduling order, so noisy outputs are bit-identical for any worker
// count. Successive outputs are splitmix64 steps.
class RandomStream {
public:
    explicit RandomStream(std::uint64_t seed) : state_(seed) {}

    static RandomStream keyed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0, std::uint64_t c = 0) {
        std::uint64_t h = mix64(seed);
        h = mix64(h ^ a);
        h = mix64(h ^ b);
        h = mix64(h ^ c);
        return RandomStream(h);
    }

    std::uint64_t next_u64() {
        state_ += 0x9E3779B97F4A7C15ull;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    // Uniform in [0, 1).
    double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // Uniform in (0, 1]; safe under log().
    double next_double_open() { return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + next_double() * (hi - lo); }

    // Standard normal via Box-Muller (two uniforms per draw).
    double normal() {
        const double u1 = next_double_open();
        const double u2 = next_double();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
    }

    double normal(double mean, double sigma) { return mean + sigma * normal(); }

    // Poisson draw. Knuth multiplication below mean 10, Hoermann's PTRS
    // transformed rejection above. Draw count varies per call, which is fine:
    // each consumer owns its stream.
    std::uint64_t poisson(double mean);

private:
    std::uint64_t state_;
};

}  // namespace hdrsim
