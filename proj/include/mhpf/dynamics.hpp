#pragma once

#include <cmath>
#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "error.hpp"
#include "filtration.hpp"
#include "geometry.hpp"
#include "kdtree.hpp"
#include "random.hpp"

namespace mhpf {

enum class NoiseMode {
    one_sided, // per coordinate U[0, kappa * s]
    centered,  // per coordinate U[-kappa * s / 2, kappa * s / 2]
};

struct DynamicsConfig {
    double kappa = 0.3;
    double epsilon_floor = 1e-3;
    std::optional<double> global_epsilon;
    NoiseMode noise = NoiseMode::one_sided;
};

/// Flat (position, velocity) samples harvested from a trajectory corpus.
/// Samples of leaf i occupy [leaf_begin[i], leaf_begin[i+1]).
struct SamplePool {
    std::size_t dim = 0;
    std::shared_ptr<std::vector<double>> positions = std::make_shared<std::vector<double>>();
    std::vector<double> velocities;
    std::vector<std::size_t> leaf_begin{0};

    [[nodiscard]] std::size_t size() const noexcept { return dim == 0 ? 0 : velocities.size() / dim; }

    [[nodiscard]] std::span<const double> velocity(std::size_t i) const noexcept
    {
        return {velocities.data() + i * dim, dim};
    }

    static SamplePool from_trajectories(std::span<const Trajectory> ts)
    {
        SamplePool pool;
        pool.dim = ts.empty() ? 0 : ts.front().dim();
        for (const auto& t : ts) {
            for (std::size_t i = 0; i + 1 < t.points.size(); ++i) {
                for (std::size_t k = 0; k < pool.dim; ++k) {
                    pool.positions->push_back(t.points[i][k]);
                    pool.velocities.push_back(t.points[i + 1][k] - t.points[i][k]);
                }
            }
            pool.leaf_begin.push_back(pool.size());
        }
        return pool;
    }
};

struct VelocityEstimate {
    Point velocity;
    bool extrapolated = false; // empty epsilon-ball, nearest sample used
};

struct StepOutcome {
    Point position;
    bool extrapolated = false;
};

/**
 * Localised dynamics of one class: inverse-distance weighted average of the
 * sample velocities inside the epsilon-ball around the query point.
 */
class ClassDynamics {
public:
    ClassDynamics() = default;

    ClassDynamics(NodeId cls, std::shared_ptr<const SamplePool> pool, std::vector<KdTree::Index> sample_ids,
                  double epsilon, double kappa, NoiseMode noise = NoiseMode::one_sided)
        : cls_(cls), pool_(std::move(pool)), epsilon_(epsilon), kappa_(kappa), noise_(noise)
    {
        if (!(epsilon > 0.0)) {
            throw invalid_input("class dynamics epsilon must be > 0");
        }
        if (!(kappa >= 0.0)) {
            throw invalid_input("class dynamics kappa must be >= 0");
        }
        if (sample_ids.empty()) {
            throw construction_error("class " + std::to_string(mhpf::index(cls)) + " has no velocity samples");
        }
        double speed = 0.0;
        for (auto id : sample_ids) {
            double sq = 0.0;
            for (double v : pool_->velocity(id)) {
                sq += v * v;
            }
            speed += std::sqrt(sq);
        }
        mean_speed_ = speed / static_cast<double>(sample_ids.size());
        index_ = KdTree(pool_->positions, pool_->dim, std::move(sample_ids));
    }

    [[nodiscard]] NodeId cls() const noexcept { return cls_; }
    [[nodiscard]] double epsilon() const noexcept { return epsilon_; }
    [[nodiscard]] double kappa() const noexcept { return kappa_; }
    [[nodiscard]] double mean_speed() const noexcept { return mean_speed_; }
    [[nodiscard]] std::size_t sample_count() const noexcept { return index_.size(); }
    [[nodiscard]] const KdTree& index() const noexcept { return index_; }
    [[nodiscard]] const SamplePool& pool() const noexcept { return *pool_; }

    /// Same model under a different class label.
    [[nodiscard]] ClassDynamics relabeled(NodeId cls) const
    {
        ClassDynamics copy = *this;
        copy.cls_ = cls;
        return copy;
    }

    [[nodiscard]] VelocityEstimate local_velocity(const Point& z) const
    {
        const std::size_t dim = pool_->dim;
        if (z.dim() != dim) {
            throw invalid_input("local_velocity: dimension mismatch");
        }
        std::vector<double> acc(dim, 0.0);
        double total = 0.0;
        std::optional<KdTree::Index> coincident;
        index_.radius_visit(z.coords(), epsilon_, [&](KdTree::Index id, double d2) {
            if (d2 == 0.0) {
                if (!coincident || id < *coincident) {
                    coincident = id;
                }
                return;
            }
            const double w = 1.0 / std::sqrt(d2);
            const auto v = pool_->velocity(id);
            for (std::size_t k = 0; k < dim; ++k) {
                acc[k] += w * v[k];
            }
            total += w;
        });
        if (coincident) {
            const auto v = pool_->velocity(*coincident);
            return {Point(v), false};
        }
        if (total > 0.0) {
            for (auto& a : acc) {
                a /= total;
            }
            return {Point(std::move(acc)), false};
        }
        const auto [nearest, d2] = index_.nearest(z.coords());
        return {Point(pool_->velocity(nearest)), true};
    }

    /// z + local velocity + per-coordinate noise of width kappa * mean_speed.
    StepOutcome step_sample(const Point& z, Rng& rng) const
    {
        auto [v, extrapolated] = local_velocity(z);
        Point next = z;
        const double width = kappa_ * mean_speed_;
        for (std::size_t k = 0; k < next.dim(); ++k) {
            const double u = rng.uniform();
            const double noise = noise_ == NoiseMode::one_sided ? u * width : (u - 0.5) * width;
            next[k] += v[k] + noise;
        }
        return {std::move(next), extrapolated};
    }

private:
    NodeId cls_{};
    std::shared_ptr<const SamplePool> pool_;
    KdTree index_;
    double epsilon_ = 1.0;
    double kappa_ = 0.0;
    double mean_speed_ = 0.0;
    NoiseMode noise_ = NoiseMode::one_sided;
};

/// One ClassDynamics per tree node, indexed by node id.
class DynamicsSet {
public:
    DynamicsSet() = default;
    explicit DynamicsSet(std::vector<ClassDynamics> classes) : classes_(std::move(classes)) {}

    [[nodiscard]] const ClassDynamics& operator[](NodeId id) const
    {
        if (index(id) >= classes_.size()) {
            throw invalid_input("no dynamics for class " + std::to_string(index(id)));
        }
        return classes_[index(id)];
    }

    [[nodiscard]] std::size_t size() const noexcept { return classes_.size(); }

private:
    std::vector<ClassDynamics> classes_;
};

/**
 * Builds per-class dynamics from the corpus the tree was clustered on
 * (trajectories[i] is leaf i). Epsilon is max(birth, floor) unless a global
 * override is configured.
 */
inline DynamicsSet build_dynamics(const ClusterTree& tree, std::span<const Trajectory> trajectories,
                                  const DynamicsConfig& cfg)
{
    if (trajectories.size() != tree.leaf_count()) {
        throw invalid_input("build_dynamics: tree has " + std::to_string(tree.leaf_count()) + " leaves but " +
                            std::to_string(trajectories.size()) + " trajectories were given");
    }
    if (!(cfg.epsilon_floor > 0.0) && !cfg.global_epsilon) {
        throw invalid_input("build_dynamics: epsilon floor must be > 0");
    }
    auto pool = std::make_shared<const SamplePool>(SamplePool::from_trajectories(trajectories));
    std::vector<ClassDynamics> classes;
    classes.reserve(tree.size());
    for (const auto& n : tree.nodes()) {
        std::vector<KdTree::Index> ids;
        for (std::size_t leaf : n.members) {
            for (std::size_t s = pool->leaf_begin[leaf]; s < pool->leaf_begin[leaf + 1]; ++s) {
                ids.push_back(static_cast<KdTree::Index>(s));
            }
        }
        const double eps = cfg.global_epsilon ? *cfg.global_epsilon : std::max(n.birth, cfg.epsilon_floor);
        classes.emplace_back(n.id, pool, std::move(ids), eps, cfg.kappa, cfg.noise);
    }
    return DynamicsSet(std::move(classes));
}

} // namespace mhpf
