#pragma once

#include <cmath>
#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "dynamics.hpp"
#include "error.hpp"
#include "filtration.hpp"
#include "particle.hpp"
#include "random.hpp"
#include "weighting.hpp"

namespace mhpf {

/**
 * Flat particle filter over a fixed set of classes. Each particle follows the
 * dynamics of its own class; only fine observations are used.
 *
 * With the leaf classes this is the single-trajectory baseline, with the
 * collapsed root class it is the all-trajectories baseline. Random streams
 * are derived exactly as in FilterStack.
 */
class BasicParticleFilter {
public:
    BasicParticleFilter(std::shared_ptr<const DynamicsSet> dynamics, std::vector<NodeId> classes, const Prior& prior,
                        FilterConfig cfg, Rng rng)
        : dynamics_(std::move(dynamics)), classes_(std::move(classes)), cfg_(cfg), rng_(rng)
    {
        cfg_.validate();
        if (classes_.empty()) {
            throw invalid_input("basic particle filter needs at least one class");
        }
        for (const auto& entry : prior) {
            if (std::find(classes_.begin(), classes_.end(), entry.cls) == classes_.end()) {
                throw invalid_input("prior assigns mass to unknown class " + std::to_string(index(entry.cls)));
            }
        }
        particles_ = sample_prior(prior, cfg_.particles, rng_.split(stream::init));
    }

    [[nodiscard]] std::span<const Particle> particles() const noexcept { return particles_; }
    [[nodiscard]] std::size_t time() const noexcept { return t_; }
    [[nodiscard]] const std::vector<NodeId>& classes() const noexcept { return classes_; }

    StepDiagnostics step(std::span<const Observation> observations)
    {
        StepDiagnostics diag;
        ++t_;
        Rng leaf_rng = rng_.split(t_).split(stream::predict_leaf);
        for (auto& p : particles_) {
            auto out = (*dynamics_)[p.cls].step_sample(p.position, leaf_rng);
            p.position = std::move(out.position);
            diag.extrapolated_steps += out.extrapolated ? 1 : 0;
        }
        for (const auto& obs : observations) {
            if (const auto* fine = std::get_if<FineObservation>(&obs)) {
                diag.weight_reset |= weigh(*fine);
            }
        }
        resample();
        return diag;
    }

    /// Normalized weight mass per class, in `classes()` order.
    [[nodiscard]] std::vector<double> class_probabilities() const
    {
        std::size_t max_id = 0;
        for (NodeId c : classes_) {
            max_id = std::max(max_id, index(c));
        }
        std::vector<double> by_id(max_id + 1, 0.0);
        double total = 0.0;
        for (const auto& p : particles_) {
            by_id[index(p.cls)] += p.weight;
            total += p.weight;
        }
        std::vector<double> out;
        for (NodeId c : classes_) {
            out.push_back(by_id[index(c)] / total);
        }
        return out;
    }

    /// Highest-probability class; ties go to the smaller id.
    [[nodiscard]] NodeId map_class() const
    {
        const auto probs = class_probabilities();
        std::size_t best = 0;
        for (std::size_t k = 1; k < classes_.size(); ++k) {
            if (probs[k] > probs[best] || (probs[k] == probs[best] && classes_[k] < classes_[best])) {
                best = k;
            }
        }
        return classes_[best];
    }

    [[nodiscard]] Point point_estimate() const { return weighted_mean(particles_); }

private:
    bool weigh(const FineObservation& obs)
    {
        std::vector<double> dist(particles_.size());
        for (std::size_t i = 0; i < particles_.size(); ++i) {
            dist[i] = euclidean(particles_[i].position, obs.position);
        }
        const auto lik = bounded_log_likelihood(dist);
        double total = 0.0;
        for (std::size_t i = 0; i < particles_.size(); ++i) {
            particles_[i].weight *= lik[i];
            total += particles_[i].weight;
        }
        if (!(total > 0.0) || !std::isfinite(total)) {
            for (auto& p : particles_) {
                p.weight = 1.0 / static_cast<double>(particles_.size());
            }
            return true;
        }
        for (auto& p : particles_) {
            p.weight /= total;
        }
        return false;
    }

    void resample()
    {
        const std::size_t n = particles_.size();
        std::vector<double> weights(n);
        for (std::size_t i = 0; i < n; ++i) {
            weights[i] = particles_[i].weight;
        }
        Rng rng = rng_.split(t_).split(stream::resample);
        const auto picks = resample_indices(weights, n, rng, cfg_.resampling);
        const std::size_t n_keep = n - cfg_.randomized_count();
        std::vector<Particle> next;
        next.reserve(n);
        for (std::size_t k = 0; k < n; ++k) {
            Particle p = particles_[picks[k]];
            p.weight = 1.0 / static_cast<double>(n);
            if (k >= n_keep) {
                p.cls = classes_[rng.index(classes_.size())];
            }
            next.push_back(std::move(p));
        }
        particles_ = std::move(next);
    }

    std::shared_ptr<const DynamicsSet> dynamics_;
    std::vector<NodeId> classes_;
    FilterConfig cfg_;
    Rng rng_;
    std::size_t t_ = 0;
    std::vector<Particle> particles_;
};

} // namespace mhpf
