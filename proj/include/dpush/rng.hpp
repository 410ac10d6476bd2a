#pragma once

#include <array>
#include <cstdint>
#include <random>
#include <span>

#include "dpush/key_id.hpp"

namespace dpush {

// Random source with two modes: a seeded deterministic stream (simulation,
// reproducible tests) and a system-entropy stream (CLI). The derived draws
// (below/between/chance/fill) are implemented here rather than with
// std::*_distribution so seeded streams are identical on every platform.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    static Rng system();

    std::uint64_t next_u64();

    // Uniform in [0, n); n must be nonzero.
    std::uint64_t below(std::uint64_t n) { return next_u64() % n; }

    // Uniform in [lo, hi] inclusive.
    std::uint64_t between(std::uint64_t lo, std::uint64_t hi) {
        return lo + (hi > lo ? below(hi - lo + 1) : 0);
    }

    // True with probability p.
    bool chance(double p) {
        if (p <= 0.0) return false;
        if (p >= 1.0) return true;
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53 < p;
    }

    void fill(std::span<std::uint8_t> out);

    std::array<std::uint8_t, 32> seed_bytes();
    KeyId random_key();

private:
    Rng() : system_(true), eng_(0) {}

    bool system_ = false;
    std::mt19937_64 eng_;
};

}  // namespace dpush
