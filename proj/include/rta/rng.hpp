#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace rta {

// All randomness in the library flows through RngStream. The engine is
// std::mt19937_64 (its output sequence is pinned by the C++ standard, so
// golden tests are portable) and the uniform/gaussian transforms below are
// written out explicitly because the std::*_distribution classes are
// implementation defined.

/// splitmix64 finalizer; used to derive independent stream seeds.
inline std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t mix64(std::uint64_t a, std::uint64_t b) { return mix64(mix64(a) ^ b); }

/// Purpose tags keep streams for unrelated jobs decoupled: consuming more
/// draws in one place never shifts the values seen elsewhere.
enum class StreamPurpose : std::uint64_t {
    Data = 0x01,
    Init = 0x02,
    Shuffle = 0x03,
    Attack = 0x04,
    Noise = 0x05,
};

class RngStream {
public:
    RngStream(std::uint64_t seed, StreamPurpose purpose, std::uint64_t index = 0)
        : engine_(mix64(mix64(seed, static_cast<std::uint64_t>(purpose)), index)) {}

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform double in [0, 1): 53 random mantissa bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Unbiased integer in [0, n); n must be > 0.
    std::uint64_t uniform_index(std::uint64_t n) {
        const std::uint64_t threshold = (0 - n) % n;  // 2^64 mod n
        std::uint64_t r;
        do {
            r = engine_();
        } while (r < threshold);
        return r % n;
    }

    /// Standard normal via Box-Muller; pairs are cached so the engine is
    /// advanced by exactly two draws per generated pair.
    double gaussian() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        // u1 in (0, 1] so the log is finite.
        const double u1 = (static_cast<double>(engine_() >> 11) + 1.0) * 0x1.0p-53;
        const double u2 = static_cast<double>(engine_() >> 11) * 0x1.0p-53;
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double angle = 6.283185307179586476925286766559 * u2;
        spare_ = radius * std::sin(angle);
        has_spare_ = true;
        return radius * std::cos(angle);
    }

private:
    std::mt19937_64 engine_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace rta
