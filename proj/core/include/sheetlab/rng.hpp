#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

// Counter-based random number generation. Every variate is a pure function
// of (seed, counter), so parallel producers can draw from disjoint counter
// ranges in any order and still reproduce the exact same stream layout.

namespace sheetlab {

// SplitMix64 finalizer. Passes the usual avalanche tests; two rounds are
// used below whenever independent keys are combined.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

// Derives an independent sub-seed, e.g. one per Monte Carlo sample index.
constexpr std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) noexcept {
    return mix64(mix64(base ^ 0x4F1BBCDCBFA53E0AULL) + index);
}

// Keyed counter stream: u64(k) is the k-th raw word of the stream.
class CounterStream {
  public:
    explicit CounterStream(std::uint64_t seed) : key_(mix64(seed ^ 0xD1B54A32D192ED03ULL)) {}

    std::uint64_t u64(std::uint64_t counter) const noexcept {
        return mix64(key_ + counter * 0x9E3779B97F4A7C15ULL);
    }

    // Uniform in (0, 1]; never returns 0 so it is safe inside log().
    double u01(std::uint64_t counter) const noexcept {
        const std::uint64_t bits = u64(counter) >> 11;  // 53 bits
        return (static_cast<double>(bits) + 1.0) * 0x1.0p-53;
    }

    // Standard normal via Box-Muller on counters (2k, 2k+1).
    double gaussian(std::uint64_t counter) const noexcept {
        const double u1 = u01(2 * counter);
        const double u2 = u01(2 * counter + 1);
        const double r = std::sqrt(-2.0 * std::log(u1));
        return r * std::cos(2.0 * std::numbers::pi * u2);
    }

  private:
    std::uint64_t key_;
};

}  // namespace sheetlab
