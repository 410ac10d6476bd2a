#pragma once

#include <cstdint>

#include "dpush/rng.hpp"

namespace dpush {

inline constexpr double kSecondsPerYear = 31'536'000.0;

// What one conversion costs a bulk sender when every message carries a
// proof of work.
struct EconomicsReport {
    double pow_seconds_per_message = 0.0;
    double messages_per_conversion = 0.0;
    double total_seconds_per_conversion = 0.0;
    double total_years_per_conversion = 0.0;
};

// Throws std::invalid_argument on negative inputs.
EconomicsReport conversion_cost(double pow_seconds_per_message, double messages_per_conversion);

struct PowBenchReport {
    int difficulty_bits = 0;
    std::size_t trials = 0;
    std::uint64_t min_attempts = 0;
    std::uint64_t max_attempts = 0;
    double median_attempts = 0.0;
    double geomean_attempts = 0.0;
    double hashes_per_second = 0.0;
    double implied_seconds_per_message = 0.0;
};

// Mines `trials` random payloads toward random targets at the given
// difficulty and reports attempt statistics plus the measured hash rate.
PowBenchReport bench_pow(int difficulty_bits, std::size_t trials, Rng& rng);

}  // namespace dpush
