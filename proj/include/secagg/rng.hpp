#pragma once

#include <cstdint>
#include <initializer_list>

namespace secagg::rng {

// SplitMix64 finalizer; the whole simulator derives its randomness from this.
inline constexpr std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Deterministic, splittable random stream. fork() derives an independent
// child stream from the stream's seed and a label, so the draw order of the
// parent never influences the child. Not cryptographic; this is a simulator.
class Stream {
public:
    Stream() : seed_(0), state_(0) {}
    explicit Stream(std::uint64_t seed) : seed_(seed), state_(seed) {}

    std::uint64_t next_u64() {
        state_ += 0x9e3779b97f4a7c15ULL;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // Uniform in [0, bound) via rejection; bound must be nonzero.
    std::uint64_t next_below(std::uint64_t bound) {
        const std::uint64_t limit = bound * ((~0ULL) / bound);
        std::uint64_t v;
        do {
            v = next_u64();
        } while (v >= limit);
        return v % bound;
    }

    // Uniform double in [0, 1), 53 bits of precision.
    double next_unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    bool bernoulli(double p_true) {
        if (p_true <= 0.0) return false;
        if (p_true >= 1.0) return true;
        return next_unit() < p_true;
    }

    Stream fork(std::initializer_list<std::uint64_t> label) const {
        std::uint64_t s = mix64(seed_ ^ 0x5851f42d4c957f2dULL);
        for (std::uint64_t w : label) s = mix64(s ^ mix64(w));
        return Stream(s);
    }

    std::uint64_t seed() const { return seed_; }

private:
    std::uint64_t seed_;
    std::uint64_t state_;
};

} // namespace secagg::rng
