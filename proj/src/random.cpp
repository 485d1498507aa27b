#include "lewisreg/random.hpp"

#include <cmath>
#include <numbers>

namespace lewisreg {

namespace {
constexpr std::uint64_t kGamma = 0x9e3779b97f4a7c15ULL;
}

std::uint64_t mix64(std::uint64_t z)
{
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

std::uint64_t SplitMix64::next()
{
    state_ += kGamma;
    return mix64(state_);
}

double SplitMix64::uniform()
{
    return double(next() >> 11) * 0x1.0p-53;
}

double SplitMix64::uniform_open()
{
    return (double(next() >> 12) + 0.5) * 0x1.0p-52;
}

double SplitMix64::normal()
{
    if (has_cached_) {
        has_cached_ = false;
        return cached_normal_;
    }
    const double u1 = uniform_open();
    const double u2 = uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    cached_normal_ = radius * std::sin(angle);
    has_cached_ = true;
    return radius * std::cos(angle);
}

std::uint64_t SplitMix64::below(std::uint64_t n)
{
    // Lemire's multiply-shift with rejection of the biased low band.
    unsigned __int128 m = (unsigned __int128)next() * n;
    auto low = std::uint64_t(m);
    if (low < n) {
        const std::uint64_t threshold = (0 - n) % n;
        while (low < threshold) {
            m = (unsigned __int128)next() * n;
            low = std::uint64_t(m);
        }
    }
    return std::uint64_t(m >> 64);
}

int SplitMix64::sign()
{
    return (next() >> 63) ? 1 : -1;
}

std::uint64_t SplitMix64::poisson(double lambda)
{
    if (!(lambda > 0.0))
        return 0;
    if (lambda < 30.0) {
        double prob = std::exp(-lambda);
        double cdf = prob;
        const double u = uniform();
        std::uint64_t k = 0;
        while (u > cdf) {
            ++k;
            prob *= lambda / double(k);
            cdf += prob;
            if (prob < 1e-300 && double(k) > lambda)
                break;
        }
        return k;
    }

    // Hormann (1993), "The transformed rejection method for generating
    // Poisson random variables".
    const double slam = std::sqrt(lambda);
    const double loglam = std::log(lambda);
    const double b = 0.931 + 2.53 * slam;
    const double a = -0.059 + 0.02483 * b;
    const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
    const double vr = 0.9277 - 3.6224 / (b - 2.0);
    for (;;) {
        const double U = uniform() - 0.5;
        const double V = uniform();
        const double us = 0.5 - std::fabs(U);
        const double k = std::floor((2.0 * a / us + b) * U + lambda + 0.43);
        if (us >= 0.07 && V <= vr)
            return std::uint64_t(k);
        if (k < 0.0 || (us < 0.013 && V > us))
            continue;
        if (std::log(V) + std::log(inv_alpha) - std::log(a / (us * us) + b) <=
            -lambda + k * loglam - std::lgamma(k + 1.0))
            return std::uint64_t(k);
    }
}

SplitMix64 substream(std::uint64_t seed, std::uint64_t index)
{
    return SplitMix64(mix64(seed) ^ index);
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index)
{
    return mix64(mix64(seed) ^ mix64(index + kGamma));
}

} // namespace lewisreg
