#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numbers>

namespace mhpf {

namespace detail {

constexpr std::uint64_t splitmix64(std::uint64_t& state) noexcept
{
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept
{
    return (x << k) | (x >> (64 - k));
}

} // namespace detail

/**
 * Splittable pseudo-random generator (xoshiro256** seeded through splitmix64).
 *
 * Every generator remembers the seed it was created from; split(key) derives an
 * independent child stream from that seed and the key only, so the children of a
 * generator do not depend on how many values were drawn from it. All
 * distributions are implemented here rather than through <random> so that
 * streams are bit-reproducible across standard libraries.
 */
class Rng {
public:
    using result_type = std::uint64_t;

    explicit Rng(std::uint64_t seed = 0) noexcept : seed_(seed)
    {
        std::uint64_t sm = seed;
        for (auto& word : state_) {
            word = detail::splitmix64(sm);
        }
    }

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

    result_type operator()() noexcept
    {
        const std::uint64_t result = detail::rotl(state_[1] * 5, 7) * 9;
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = detail::rotl(state_[3], 45);
        return result;
    }

    [[nodiscard]] std::uint64_t seed() const noexcept { return seed_; }

    [[nodiscard]] Rng split(std::uint64_t key) const noexcept
    {
        std::uint64_t sm = seed_ ^ 0x5851f42d4c957f2dULL;
        const std::uint64_t a = detail::splitmix64(sm);
        std::uint64_t km = key + 0x2545f4914f6cdd1dULL;
        const std::uint64_t b = detail::splitmix64(km);
        return Rng(a ^ detail::rotl(b, 23));
    }

    /// Uniform double in [0, 1).
    double uniform() noexcept { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }

    /// Uniform integer in [0, n); n must be positive.
    std::size_t index(std::size_t n) noexcept
    {
        // Lemire's nearly-divisionless method
        __extension__ using u128 = unsigned __int128;
        const auto range = static_cast<std::uint64_t>(n);
        u128 m = static_cast<u128>((*this)()) * range;
        auto low = static_cast<std::uint64_t>(m);
        if (low < range) {
            const std::uint64_t threshold = (0 - range) % range;
            while (low < threshold) {
                m = static_cast<u128>((*this)()) * range;
                low = static_cast<std::uint64_t>(m);
            }
        }
        return static_cast<std::size_t>(m >> 64);
    }

    /// Standard normal draw (Box-Muller, one value per call).
    double normal() noexcept
    {
        double u1 = uniform();
        while (u1 <= 0.0) {
            u1 = uniform();
        }
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

private:
    std::uint64_t seed_;
    std::array<std::uint64_t, 4> state_{};
};

/// Stream keys used when a filter derives per-step generators.
namespace stream {
inline constexpr std::uint64_t init = 0x1000;
inline constexpr std::uint64_t predict_leaf = 1;
inline constexpr std::uint64_t predict_upper = 2;
inline constexpr std::uint64_t resample = 3;
} // namespace stream

} // namespace mhpf
