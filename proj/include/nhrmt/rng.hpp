#pragma once

// Deterministic random-number utilities. Every stochastic component of the
// library draws from a Stream seeded through derive_seed, so a run is fully
// reproducible from its base seed regardless of thread count.

#include <cstdint>

namespace nhrmt::rng {

// SplitMix64 finalizer: a bijective 64-bit mixing permutation.
inline constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
    x ^= x >> 30;
    x *= 0xbf58476d1ce4e5b9ull;
    x ^= x >> 27;
    x *= 0x94d049bb133111ebull;
    x ^= x >> 31;
    return x;
}

// Seed of sub-stream `index` (ensemble member, variance target, chain, ...)
// for a run seeded with `base`: mix64(base + (index + 1) * golden gamma).
inline constexpr std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) noexcept {
    return mix64(base + 0x9e3779b97f4a7c15ull * (index + 1));
}

// xoshiro256++ stream with uniform and Gaussian variates on top. The
// generator and the Box-Muller transform use only integer arithmetic and
// libm, so identical seeds give identical sequences across platforms.
class Stream {
public:
    explicit Stream(std::uint64_t seed) noexcept {
        // Expand the seed with SplitMix64, as recommended for xoshiro.
        std::uint64_t x = seed;
        for (auto& word : state_) {
            x += 0x9e3779b97f4a7c15ull;
            word = mix64(x);
        }
    }

    std::uint64_t next_u64() noexcept {
        const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    // Uniform on [0, 1), 53 random bits.
    double uniform() noexcept { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // Uniform on (0, 1]; safe as a log() argument.
    double uniform_open() noexcept {
        return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }

    // Standard normal via Box-Muller; the second variate of each pair is cached.
    double gaussian() noexcept;

    double gaussian(double stddev) noexcept { return stddev * gaussian(); }

private:
    static constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept {
        return (x << k) | (x >> (64 - k));
    }

    std::uint64_t state_[4] = {};
    double spare_ = 0.0;
    bool has_spare_ = false;
};

} // namespace nhrmt::rng

#include <cmath>

namespace nhrmt::rng {

inline double Stream::gaussian() noexcept {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    const double u = uniform_open();
    const double v = uniform();
    const double radius = std::sqrt(-2.0 * std::log(u));
    const double angle = 2.0 * M_PI * v;
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
}

} // namespace nhrmt::rng
