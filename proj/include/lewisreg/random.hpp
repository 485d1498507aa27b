#pragma once

// Portable, seedable randomness. std::*_distribution output differs between
// standard libraries, so every draw used by the library goes through the
// generator and transforms below.

#include <cstdint>
#include <limits>

namespace lewisreg {

/// Finalizer of SplitMix64; a bijective 64-bit mixer.
std::uint64_t mix64(std::uint64_t z);

/// SplitMix64 (Steele, Lea, Flood 2014). State advances by the golden gamma.
class SplitMix64 {
public:
    using result_type = std::uint64_t;

    explicit SplitMix64(std::uint64_t state) : state_(state) {}

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    result_type next();
    result_type operator()() { return next(); }

    /// Uniform in [0, 1) with 53 random bits.
    double uniform();
    /// Uniform in (0, 1).
    double uniform_open();
    /// Standard normal (Box-Muller, second variate cached).
    double normal();
    /// Uniform integer in [0, n); n > 0.
    std::uint64_t below(std::uint64_t n);
    /// Poisson(lambda): inversion for lambda < 30, transformed rejection
    /// (PTRS) otherwise.
    std::uint64_t poisson(double lambda);
    /// +1 or -1 with equal probability.
    int sign();

private:
    std::uint64_t state_;
    double cached_normal_ = 0.0;
    bool has_cached_ = false;
};

/// Independent stream for a (seed, index) pair, e.g. one per row or trial.
/// Streams are a pure function of the pair, so parallel and serial
/// consumers see the same numbers.
SplitMix64 substream(std::uint64_t seed, std::uint64_t index);

/// Derived seed for a (seed, index) pair.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index);

} // namespace lewisreg
