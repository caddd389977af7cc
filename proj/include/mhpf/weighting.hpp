#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "random.hpp"

namespace mhpf {

inline constexpr double likelihood_offset = 1e-9;

/**
 * Bounded negative-log likelihood of a set of distances:
 * -log((d + e0) / (d_max + 2 e0)). Monotone decreasing in d, finite, and
 * strictly positive for every candidate including the farthest one.
 */
inline std::vector<double> bounded_log_likelihood(std::span<const double> distances)
{
    double dmax = 0.0;
    for (double d : distances) {
        dmax = std::max(dmax, d);
    }
    std::vector<double> out(distances.size());
    const double denom = dmax + 2.0 * likelihood_offset;
    for (std::size_t i = 0; i < distances.size(); ++i) {
        out[i] = -std::log((distances[i] + likelihood_offset) / denom);
    }
    return out;
}

enum class ResamplingScheme { multinomial, systematic };

/// Draws `count` indices proportional to `weights` (need not be normalized).
inline std::vector<std::size_t> resample_indices(std::span<const double> weights, std::size_t count, Rng& rng,
                                                 ResamplingScheme scheme = ResamplingScheme::multinomial)
{
    std::vector<double> cumulative(weights.size());
    double total = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        total += weights[i];
        cumulative[i] = total;
    }
    std::vector<std::size_t> out;
    out.reserve(count);
    if (weights.empty() || count == 0) {
        return out;
    }
    auto locate = [&](double u) {
        const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
        return it == cumulative.end() ? weights.size() - 1 : static_cast<std::size_t>(it - cumulative.begin());
    };
    if (scheme == ResamplingScheme::multinomial) {
        for (std::size_t k = 0; k < count; ++k) {
            out.push_back(locate(rng.uniform() * total));
        }
    } else {
        const double step = total / static_cast<double>(count);
        const double start = rng.uniform() * step;
        for (std::size_t k = 0; k < count; ++k) {
            out.push_back(locate(start + static_cast<double>(k) * step));
        }
    }
    return out;
}

} // namespace mhpf
