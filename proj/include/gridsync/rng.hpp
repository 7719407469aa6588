#pragma once

// Counter-based random streams. A stream is fully determined by its key
// (seed, stream id, counter), so agents can be stepped in any order or in
// parallel and still see the same draws.

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>

namespace gridsync {

constexpr std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

constexpr std::uint64_t mix_key(std::uint64_t seed, std::uint64_t stream, std::uint64_t counter)
{
    return splitmix64(splitmix64(splitmix64(seed) ^ stream) ^ counter);
}

/// SplitMix64 generator. Satisfies UniformRandomBitGenerator, but the
/// draw helpers below are preferred: they are identical on every platform.
class Rng {
public:
    using result_type = std::uint64_t;

    explicit constexpr Rng(std::uint64_t state) : state_(state) {}
    constexpr Rng(std::uint64_t seed, std::uint64_t stream, std::uint64_t counter)
        : state_(mix_key(seed, stream, counter))
    {}

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    constexpr result_type operator()()
    {
        state_ += 0x9e3779b97f4a7c15ULL;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    /// Uniform in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Uniform integer in [0, n], unbiased (rejection).
    std::uint64_t uniform_int(std::uint64_t n)
    {
        if (n == std::numeric_limits<std::uint64_t>::max())
            return (*this)();
        const std::uint64_t range = n + 1;
        const std::uint64_t limit = max() - max() % range;
        std::uint64_t x = 0;
        do {
            x = (*this)();
        } while (x >= limit);
        return x % range;
    }

    bool bernoulli(double p) { return uniform() < p; }

    /// Standard normal via Box-Muller (one variate per call).
    double normal()
    {
        const double u1 = 1.0 - uniform();  // (0, 1]
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

private:
    std::uint64_t state_;
};

}  // namespace gridsync
