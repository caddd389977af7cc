#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "error.hpp"
#include "filtration.hpp"
#include "geometry.hpp"
#include "random.hpp"
#include "weighting.hpp"

namespace mhpf {

/// Weighted (position, class) hypothesis.
struct Particle {
    Point position;
    NodeId cls{};
    double weight = 0.0;
};

struct FineObservation {
    Point position;
};

/// Evidence naming a class alive at `level`.
struct CoarseObservation {
    NodeId cls{};
    double level = 0.0;
};

using Observation = std::variant<FineObservation, CoarseObservation>;

inline bool is_fine(const Observation& o) noexcept { return std::holds_alternative<FineObservation>(o); }

/// Prior over (class, initial position); masses need not be normalized.
struct ClassPrior {
    NodeId cls{};
    double mass = 0.0;
    Point position;
};

using Prior = std::vector<ClassPrior>;

struct FilterConfig {
    std::size_t particles = 100;
    double depletion = 0.01; // fraction v of particles whose class is randomized after resampling
    ResamplingScheme resampling = ResamplingScheme::multinomial;
    bool eager_upper_prediction = false; // advance internal-node particles at predict time rather than on read

    [[nodiscard]] std::size_t randomized_count() const noexcept
    {
        return static_cast<std::size_t>(std::llround(static_cast<double>(particles) * depletion));
    }

    void validate() const
    {
        if (particles < 1) {
            throw invalid_input("particle count must be >= 1");
        }
        if (!(depletion >= 0.0 && depletion < 1.0)) {
            throw invalid_input("depletion fraction must be in [0, 1)");
        }
    }
};

struct StepDiagnostics {
    std::size_t extrapolated_steps = 0;
    bool weight_reset = false;
    bool rebuild_idempotent = true;
};

/// Sum(w z) / Sum(w) over the given particles.
inline Point weighted_mean(std::span<const Particle> particles)
{
    if (particles.empty()) {
        throw invalid_input("weighted_mean: no particles");
    }
    Point acc(particles.front().position.dim());
    double total = 0.0;
    for (const auto& p : particles) {
        for (std::size_t k = 0; k < acc.dim(); ++k) {
            acc[k] += p.weight * p.position[k];
        }
        total += p.weight;
    }
    if (!(total > 0.0)) {
        throw invalid_input("weighted_mean: weights sum to zero");
    }
    for (std::size_t k = 0; k < acc.dim(); ++k) {
        acc[k] /= total;
    }
    return acc;
}

/// Draws N particles from the prior with equal weights 1/N.
inline std::vector<Particle> sample_prior(const Prior& prior, std::size_t n, Rng rng)
{
    if (prior.empty()) {
        throw invalid_input("prior is empty");
    }
    std::vector<double> masses;
    double total = 0.0;
    for (const auto& entry : prior) {
        if (!(entry.mass >= 0.0) || !std::isfinite(entry.mass)) {
            throw invalid_input("prior masses must be finite and non-negative");
        }
        if (entry.position.dim() != prior.front().position.dim() || !entry.position.finite()) {
            throw invalid_input("prior positions must be finite and share a dimension");
        }
        masses.push_back(entry.mass);
        total += entry.mass;
    }
    if (!(total > 0.0)) {
        throw invalid_input("prior has no mass");
    }
    std::vector<Particle> out;
    out.reserve(n);
    const double w = 1.0 / static_cast<double>(n);
    for (std::size_t k : resample_indices(masses, n, rng)) {
        out.push_back(Particle{prior[k].position, prior[k].cls, w});
    }
    return out;
}

} // namespace mhpf
