#include "dpush/economics.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "dpush/block.hpp"

namespace dpush {

EconomicsReport conversion_cost(double pow_seconds_per_message, double messages_per_conversion) {
    if (pow_seconds_per_message < 0.0 || messages_per_conversion < 0.0)
        throw std::invalid_argument("conversion_cost: inputs must be nonnegative");
    EconomicsReport report;
    report.pow_seconds_per_message = pow_seconds_per_message;
    report.messages_per_conversion = messages_per_conversion;
    report.total_seconds_per_conversion = pow_seconds_per_message * messages_per_conversion;
    report.total_years_per_conversion = report.total_seconds_per_conversion / kSecondsPerYear;
    return report;
}

PowBenchReport bench_pow(int difficulty_bits, std::size_t trials, Rng& rng) {
    if (trials < 1) throw std::invalid_argument("bench_pow: trials must be >= 1");
    Difficulty d(difficulty_bits);

    std::vector<std::uint64_t> attempts;
    attempts.reserve(trials);
    std::uint64_t total_attempts = 0;
    double log_sum = 0.0;

    auto t0 = std::chrono::steady_clock::now();
    for (std::size_t i = 0; i < trials; ++i) {
        Bytes payload(64);
        rng.fill(payload);
        auto result = mine(rng.random_key(), d, payload, rng.next_u64());
        attempts.push_back(result.attempts);
        total_attempts += result.attempts;
        log_sum += std::log(static_cast<double>(result.attempts));
    }
    auto elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    std::sort(attempts.begin(), attempts.end());
    PowBenchReport report;
    report.difficulty_bits = difficulty_bits;
    report.trials = trials;
    report.min_attempts = attempts.front();
    report.max_attempts = attempts.back();
    report.median_attempts =
        trials % 2 ? static_cast<double>(attempts[trials / 2])
                   : (static_cast<double>(attempts[trials / 2 - 1]) +
                      static_cast<double>(attempts[trials / 2])) / 2.0;
    report.geomean_attempts = std::exp(log_sum / static_cast<double>(trials));
    report.hashes_per_second =
        elapsed > 0.0 ? static_cast<double>(total_attempts) / elapsed : 0.0;
    report.implied_seconds_per_message =
        report.hashes_per_second > 0.0 ? report.geomean_attempts / report.hashes_per_second : 0.0;
    return report;
}

}  // namespace dpush
