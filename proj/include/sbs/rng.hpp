#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>

namespace sbs {

// All randomness in the toolkit flows through this wrapper so that streams are
// reproducible bit-for-bit. std::mt19937_64 is fully specified by the standard;
// the distribution transforms below are our own because the standard library's
// distributions are implementation-defined.
class Rng {
public:
    explicit Rng(uint64_t seed) : engine_(seed) {}

    uint64_t next_u64() { return engine_(); }

    // Uniform in [0, 1).
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Uniform integer in [0, n).
    uint64_t uniform_index(uint64_t n) {
        // Modulo bias is negligible for n far below 2^64 and keeps the
        // consumption of engine draws fixed at one per call.
        return engine_() % n;
    }

    // Standard normal via Box-Muller; always consumes exactly two draws.
    double normal() {
        const double u1 = (static_cast<double>(engine_() >> 11) + 1.0) * 0x1.0p-53;
        const double u2 = static_cast<double>(engine_() >> 11) * 0x1.0p-53;
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
    }

    double normal(double mean, double sigma) { return mean + sigma * normal(); }

    std::mt19937_64& engine() { return engine_; }

private:
    std::mt19937_64 engine_;
};

// splitmix64, used to derive independent sub-stream seeds from one master seed.
inline uint64_t split_seed(uint64_t seed, uint64_t stream) {
    uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Stable tag for naming sub-streams ("motion", "sensors", ...).
inline uint64_t stream_tag(std::string_view name) {
    uint64_t h = 0xcbf29ce484222325ULL;
    for (char c : name) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline uint64_t derive_seed(uint64_t master, std::string_view stream) {
    return split_seed(master, stream_tag(stream));
}

}  // namespace sbs
