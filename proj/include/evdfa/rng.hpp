#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace evdfa::synth {

/// Deterministic sampling on top of std::mt19937_64. The engine itself is
/// fully specified by the standard; the distribution transforms below are
/// pinned here because the std::*_distribution classes are free to differ
/// between standard libraries. Same seed, same stream, everywhere.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    /// One engine draw mapped to [0, 1) with 53 significant bits.
    double uniform01() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    /// Inverse-CDF exponential with the given rate (mean 1/rate).
    double exponential(double rate) {
        return -std::log(1.0 - uniform01()) / rate;
    }

    /// floor(u * n), clamped to n - 1. Requires n >= 1.
    std::uint32_t uniform_below(std::uint32_t n) {
        const auto v = static_cast<std::uint32_t>(uniform01() * n);
        return v < n ? v : n - 1;
    }

    /// +1 or -1 with equal probability.
    std::int8_t polarity() { return uniform01() < 0.5 ? std::int8_t{1} : std::int8_t{-1}; }

  private:
    std::mt19937_64 engine_;
};

} // namespace evdfa::synth
