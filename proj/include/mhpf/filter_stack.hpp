#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "dynamics.hpp"
#include "error.hpp"
#include "filtration.hpp"
#include "geometry.hpp"
#include "particle.hpp"
#include "random.hpp"
#include "weighting.hpp"

namespace mhpf {

/**
 * Multiscale hierarchy of particle filters.
 *
 * The finest level holds N particles in draw order. Every internal node's
 * particle set is realized by relabeled copies of its children's particles,
 * so any level of the tree carries exactly N particles. Class probabilities
 * are kept for every node and stay consistent: each level sums to one and
 * every internal node equals the sum of its children.
 *
 * Randomness: step t draws from rng.split(t).split(stream key), one stream
 * per purpose, so the finest level consumes exactly the same values as a
 * flat particle filter seeded the same way.
 */
class FilterStack {
public:
    FilterStack(std::shared_ptr<const ClusterTree> tree, std::shared_ptr<const DynamicsSet> dynamics,
                const Prior& prior, FilterConfig cfg, Rng rng)
        : tree_(std::move(tree)), dynamics_(std::move(dynamics)), cfg_(cfg), rng_(rng)
    {
        cfg_.validate();
        for (const auto& entry : prior) {
            if (!tree_->contains(entry.cls) || !tree_->is_leaf(entry.cls)) {
                throw invalid_input("prior assigns mass to non-leaf class " + std::to_string(index(entry.cls)));
            }
        }
        init_particles(sample_prior(prior, cfg_.particles, rng_.split(stream::init)));
    }

    /// Starts from explicit finest-level particles (weights are normalized).
    static FilterStack from_particles(std::shared_ptr<const ClusterTree> tree,
                                      std::shared_ptr<const DynamicsSet> dynamics, std::vector<Particle> leaf,
                                      FilterConfig cfg, Rng rng)
    {
        cfg.particles = leaf.size();
        FilterStack stack(std::move(tree), std::move(dynamics), cfg, rng);
        for (const auto& p : leaf) {
            if (!stack.tree_->contains(p.cls) || !stack.tree_->is_leaf(p.cls)) {
                throw invalid_input("finest-level particle with non-leaf class " + std::to_string(index(p.cls)));
            }
        }
        double total = 0.0;
        for (const auto& p : leaf) {
            if (!(p.weight >= 0.0) || !std::isfinite(p.weight)) {
                throw invalid_input("particle weights must be finite and non-negative");
            }
            total += p.weight;
        }
        if (!(total > 0.0)) {
            throw invalid_input("particle weights sum to zero");
        }
        for (auto& p : leaf) {
            p.weight /= total;
        }
        stack.init_particles(std::move(leaf));
        return stack;
    }

    [[nodiscard]] const ClusterTree& tree() const noexcept { return *tree_; }
    [[nodiscard]] const FilterConfig& config() const noexcept { return cfg_; }
    [[nodiscard]] std::size_t time() const noexcept { return t_; }

    [[nodiscard]] double probability(NodeId c) const { return probs_.at(index(c)); }
    [[nodiscard]] const std::vector<double>& probabilities() const noexcept { return probs_; }
    [[nodiscard]] std::span<const Particle> leaf_particles() const noexcept { return leaf_; }
    std::span<Particle> mutable_leaf_particles() noexcept { return leaf_; }

    /// Particles realized at node c (copies for leaves).
    [[nodiscard]] std::vector<Particle> particles_of(NodeId c) const
    {
        if (tree_->is_leaf(c)) {
            std::vector<Particle> out;
            for (const auto& p : leaf_) {
                if (p.cls == c) {
                    out.push_back(p);
                }
            }
            return out;
        }
        materialize_upper();
        return upper_.at(index(c));
    }

    std::span<Particle> mutable_particles(NodeId c)
    {
        if (tree_->is_leaf(c)) {
            throw invalid_input("finest-level particles are edited through mutable_leaf_particles");
        }
        materialize_upper();
        return upper_.at(index(c));
    }

    [[nodiscard]] std::size_t particle_count(NodeId c) const
    {
        if (tree_->is_leaf(c)) {
            return static_cast<std::size_t>(
                std::count_if(leaf_.begin(), leaf_.end(), [c](const Particle& p) { return p.cls == c; }));
        }
        return upper_.at(index(c)).size();
    }

    [[nodiscard]] std::size_t level_particle_count(double b) const
    {
        std::size_t total = 0;
        for (NodeId c : tree_->alive_at(b)) {
            total += particle_count(c);
        }
        return total;
    }

    /**
     * Tree probability rebuild from one level: probabilities of `level` come
     * from its particle weights, descendants are rescaled proportionally to
     * their parent's change, and ancestors are re-summed.
     */
    void rebuild_tree(std::span<const NodeId> level)
    {
        const std::size_t n_nodes = tree_->size();
        std::vector<char> in_level(n_nodes, 0);
        std::size_t covered = 0;
        for (NodeId c : level) {
            if (!tree_->contains(c) || in_level[index(c)]) {
                throw invalid_input("rebuild_tree: level lists an unknown or repeated node");
            }
            in_level[index(c)] = 1;
            covered += tree_->node(c).members.size();
        }
        if (covered != tree_->leaf_count()) {
            throw invalid_input("rebuild_tree: level does not partition the leaves");
        }

        std::vector<double> sums(n_nodes, 0.0);
        double total = 0.0;
        for (const auto& p : leaf_) {
            if (in_level[index(p.cls)]) {
                sums[index(p.cls)] += p.weight;
                total += p.weight;
            }
        }
        for (NodeId c : level) {
            if (!tree_->is_leaf(c)) {
                for (const auto& p : upper_[index(c)]) {
                    sums[index(c)] += p.weight;
                }
                total += sums[index(c)];
            }
        }
        if (!(total > 0.0) || !std::isfinite(total)) {
            throw invalid_input("rebuild_tree: level weights do not sum to a positive value");
        }
        for (NodeId c : level) {
            probs_[index(c)] = sums[index(c)] / total;
        }

        // parents have larger ids, so a descending sweep visits them first
        std::vector<char> below(n_nodes, 0);
        const auto& nodes = tree_->nodes();
        for (std::size_t i = n_nodes; i-- > 0;) {
            const auto& parent = nodes[i].parent;
            if (!parent || in_level[i]) {
                continue;
            }
            const std::size_t pi = index(*parent);
            if (!(in_level[pi] || below[pi])) {
                continue;
            }
            below[i] = 1;
            if (prev_[pi] > 0.0) {
                probs_[i] = prev_[i] * (probs_[pi] / prev_[pi]);
            } else {
                probs_[i] = probs_[pi] / static_cast<double>(nodes[pi].children.size());
            }
        }
        for (std::size_t i = tree_->leaf_count(); i < n_nodes; ++i) {
            double s = 0.0;
            for (NodeId child : nodes[i].children) {
                s += probs_[index(child)];
            }
            probs_[i] = s;
        }
    }

    /// Realizes every internal node's particles as relabeled copies of its children's.
    void propagate_up()
    {
        upper_pending_.reset();
        const auto& nodes = tree_->nodes();
        std::vector<std::vector<std::size_t>> buckets(tree_->leaf_count());
        for (std::size_t i = 0; i < leaf_.size(); ++i) {
            buckets[index(leaf_[i].cls)].push_back(i);
        }
        for (std::size_t i = tree_->leaf_count(); i < nodes.size(); ++i) {
            auto& out = upper_[i];
            out.clear();
            for (NodeId child : nodes[i].children) {
                if (tree_->is_leaf(child)) {
                    for (std::size_t k : buckets[index(child)]) {
                        out.push_back(Particle{leaf_[k].position, node_id(i), leaf_[k].weight});
                    }
                } else {
                    for (const auto& p : upper_[index(child)]) {
                        out.push_back(Particle{p.position, node_id(i), p.weight});
                    }
                }
            }
        }
    }

    /**
     * Moves every particle at every level with its own class's dynamics.
     * Internal-node positions come from their own random stream and are only
     * computed when read (or immediately with eager_upper_prediction); either
     * way they are identical. The returned extrapolation count covers the
     * levels that were actually computed.
     */
    std::size_t predict()
    {
        std::size_t extrapolated = 0;
        const Rng step_rng = rng_.split(t_);
        Rng leaf_rng = step_rng.split(stream::predict_leaf);
        for (auto& p : leaf_) {
            auto out = (*dynamics_)[p.cls].step_sample(p.position, leaf_rng);
            p.position = std::move(out.position);
            extrapolated += out.extrapolated ? 1 : 0;
        }
        upper_pending_ = step_rng.split(stream::predict_upper);
        if (cfg_.eager_upper_prediction) {
            extrapolated += materialize_upper();
        }
        return extrapolated;
    }

    /// Observation update. Returns true when the weights had to be reset.
    bool update(const Observation& obs)
    {
        prev_ = probs_;
        if (const auto* fine = std::get_if<FineObservation>(&obs)) {
            return update_fine(*fine);
        }
        return update_coarse(std::get<CoarseObservation>(obs));
    }

    /// Resamples the finest level, randomizes the class of round(N v) particles,
    /// and re-establishes the tree.
    void resample()
    {
        const std::size_t n = leaf_.size();
        std::vector<double> weights(n);
        for (std::size_t i = 0; i < n; ++i) {
            weights[i] = leaf_[i].weight;
        }
        Rng rng = rng_.split(t_).split(stream::resample);
        const auto picks = resample_indices(weights, n, rng, cfg_.resampling);
        const std::size_t n_random = cfg_.randomized_count();
        const std::size_t n_keep = n - n_random;
        const double w = 1.0 / static_cast<double>(n);
        std::vector<Particle> next;
        next.reserve(n);
        for (std::size_t k = 0; k < n; ++k) {
            Particle p = leaf_[picks[k]];
            p.weight = w;
            if (k >= n_keep) {
                p.cls = node_id(rng.index(tree_->leaf_count()));
            }
            next.push_back(std::move(p));
        }
        leaf_ = std::move(next);
        prev_ = probs_;
        rebuild_tree(leaves_);
        propagate_up();
        prev_ = probs_;
    }

    /**
     * One filter iteration: rebuild from the finest level, realize the upper
     * levels, predict, apply observations in arrival order, resample.
     */
    StepDiagnostics step(std::span<const Observation> observations)
    {
        StepDiagnostics diag;
        ++t_;
        prev_ = probs_;
        const std::vector<double> before = probs_;
        rebuild_tree(leaves_);
        for (std::size_t i = 0; i < probs_.size(); ++i) {
            if (std::abs(probs_[i] - before[i]) > 1e-12) {
                diag.rebuild_idempotent = false;
            }
        }
        propagate_up();
        diag.extrapolated_steps = predict();
        for (const auto& obs : observations) {
            diag.weight_reset |= update(obs);
        }
        resample();
        return diag;
    }

    /// Highest-probability class alive at b; ties go to the smaller birth, then the smaller id.
    [[nodiscard]] NodeId map_class(double b) const
    {
        const auto alive = tree_->alive_at(b);
        NodeId best = alive.front();
        for (NodeId c : alive) {
            const double pc = probs_[index(c)];
            const double pb = probs_[index(best)];
            if (pc > pb || (pc == pb && (tree_->birth(c) < tree_->birth(best) ||
                                         (tree_->birth(c) == tree_->birth(best) && c < best)))) {
                best = c;
            }
        }
        return best;
    }

    /// Weighted mean of the finest-level particle positions.
    [[nodiscard]] Point point_estimate() const { return weighted_mean(leaf_); }

private:
    FilterStack(std::shared_ptr<const ClusterTree> tree, std::shared_ptr<const DynamicsSet> dynamics,
                FilterConfig cfg, Rng rng)
        : tree_(std::move(tree)), dynamics_(std::move(dynamics)), cfg_(cfg), rng_(rng)
    {
        cfg_.validate();
    }

    void init_particles(std::vector<Particle> leaf)
    {
        if (!tree_ || !dynamics_ || dynamics_->size() != tree_->size()) {
            throw invalid_input("filter stack needs dynamics for every tree node");
        }
        for (std::size_t i = 0; i < tree_->leaf_count(); ++i) {
            leaves_.push_back(node_id(i));
        }
        leaf_ = std::move(leaf);
        if (leaf_.empty()) {
            throw invalid_input("filter stack needs at least one particle");
        }
        upper_.assign(tree_->size(), {});
        probs_.assign(tree_->size(), 0.0);
        prev_ = probs_;
        rebuild_tree(leaves_);
        propagate_up();
        prev_ = probs_;
    }

    std::size_t materialize_upper() const
    {
        if (!upper_pending_) {
            return 0;
        }
        Rng rng = *upper_pending_;
        upper_pending_.reset();
        std::size_t extrapolated = 0;
        for (std::size_t i = tree_->leaf_count(); i < upper_.size(); ++i) {
            const auto& dyn = (*dynamics_)[node_id(i)];
            for (auto& p : upper_[i]) {
                auto out = dyn.step_sample(p.position, rng);
                p.position = std::move(out.position);
                extrapolated += out.extrapolated ? 1 : 0;
            }
        }
        return extrapolated;
    }

    /// Scales particles of classes outside `updated` by their class-probability ratio.
    void rescale_rest(const std::vector<char>& updated)
    {
        auto scale = [&](std::span<Particle> ps, std::size_t c) {
            if (prev_[c] > 0.0) {
                const double ratio = probs_[c] / prev_[c];
                for (auto& p : ps) {
                    p.weight *= ratio;
                }
            } else if (!ps.empty()) {
                for (auto& p : ps) {
                    p.weight = probs_[c] / static_cast<double>(ps.size());
                }
            }
        };
        std::vector<std::vector<std::size_t>> leaf_groups(tree_->leaf_count());
        for (std::size_t i = 0; i < leaf_.size(); ++i) {
            leaf_groups[index(leaf_[i].cls)].push_back(i);
        }
        for (std::size_t c = 0; c < tree_->leaf_count(); ++c) {
            if (updated[c] || leaf_groups[c].empty()) {
                continue;
            }
            if (prev_[c] > 0.0) {
                const double ratio = probs_[c] / prev_[c];
                for (std::size_t i : leaf_groups[c]) {
                    leaf_[i].weight *= ratio;
                }
            } else {
                for (std::size_t i : leaf_groups[c]) {
                    leaf_[i].weight = probs_[c] / static_cast<double>(leaf_groups[c].size());
                }
            }
        }
        for (std::size_t c = tree_->leaf_count(); c < upper_.size(); ++c) {
            if (!updated[c]) {
                scale(upper_[c], c);
            }
        }
    }

    bool update_fine(const FineObservation& obs)
    {
        if (obs.position.dim() != leaf_.front().position.dim() || !obs.position.finite()) {
            throw invalid_input("fine observation has the wrong dimension or non-finite coordinates");
        }
        std::vector<double> dist(leaf_.size());
        for (std::size_t i = 0; i < leaf_.size(); ++i) {
            dist[i] = euclidean(leaf_[i].position, obs.position);
        }
        const auto lik = bounded_log_likelihood(dist);
        double total = 0.0;
        for (std::size_t i = 0; i < leaf_.size(); ++i) {
            leaf_[i].weight *= lik[i];
            total += leaf_[i].weight;
        }
        bool reset = false;
        if (!(total > 0.0) || !std::isfinite(total)) {
            reset = true;
            for (auto& p : leaf_) {
                p.weight = 1.0 / static_cast<double>(leaf_.size());
            }
        } else {
            for (auto& p : leaf_) {
                p.weight /= total;
            }
        }
        rebuild_tree(leaves_);
        std::vector<char> updated(tree_->size(), 0);
        for (NodeId c : leaves_) {
            updated[index(c)] = 1;
        }
        rescale_rest(updated);
        return reset;
    }

    bool update_coarse(const CoarseObservation& obs)
    {
        if (!tree_->contains(obs.cls)) {
            throw invalid_input("coarse observation names unknown class " + std::to_string(index(obs.cls)));
        }
        if (!tree_->alive(obs.cls, obs.level)) {
            throw invalid_input("coarse observation class " + std::to_string(index(obs.cls)) +
                                " is not alive at level " + std::to_string(obs.level));
        }
        const auto level = tree_->alive_at(obs.level);
        std::vector<double> dist;
        for (NodeId c : level) {
            dist.push_back(tree_->class_distance(c, obs.cls));
        }
        const auto lik = bounded_log_likelihood(dist);

        std::vector<double> class_lik(tree_->size(), 0.0);
        std::vector<char> updated(tree_->size(), 0);
        for (std::size_t k = 0; k < level.size(); ++k) {
            class_lik[index(level[k])] = lik[k];
            updated[index(level[k])] = 1;
        }

        // every particle of a class gets the same weight: class mass / count * likelihood
        std::vector<double> mass(tree_->size(), 0.0);
        std::vector<std::size_t> count(tree_->size(), 0);
        for (const auto& p : leaf_) {
            if (updated[index(p.cls)]) {
                mass[index(p.cls)] += p.weight;
                ++count[index(p.cls)];
            }
        }
        for (NodeId c : level) {
            if (!tree_->is_leaf(c)) {
                for (const auto& p : upper_[index(c)]) {
                    mass[index(c)] += p.weight;
                }
                count[index(c)] = upper_[index(c)].size();
            }
        }
        double total = 0.0;
        double total_mass = 0.0;
        for (NodeId c : level) {
            total += mass[index(c)] * class_lik[index(c)];
            total_mass += mass[index(c)];
        }
        bool reset = false;
        auto class_weight = [&](std::size_t c) {
            const double per = count[c] ? mass[c] / static_cast<double>(count[c]) : 0.0;
            if (total > 0.0 && std::isfinite(total)) {
                return per * class_lik[c];
            }
            if (total_mass > 0.0) {
                return per;
            }
            return 1.0;
        };
        if (!(total > 0.0) || !std::isfinite(total)) {
            reset = true;
        }
        for (auto& p : leaf_) {
            if (updated[index(p.cls)]) {
                p.weight = class_weight(index(p.cls));
            }
        }
        for (NodeId c : level) {
            if (!tree_->is_leaf(c)) {
                const double w = class_weight(index(c));
                for (auto& p : upper_[index(c)]) {
                    p.weight = w;
                }
            }
        }
        rebuild_tree(level);
        rescale_rest(updated);
        return reset;
    }

    std::shared_ptr<const ClusterTree> tree_;
    std::shared_ptr<const DynamicsSet> dynamics_;
    FilterConfig cfg_;
    Rng rng_;
    std::size_t t_ = 0;
    std::vector<NodeId> leaves_;
    std::vector<Particle> leaf_;
    mutable std::vector<std::vector<Particle>> upper_;
    mutable std::optional<Rng> upper_pending_;
    std::vector<double> probs_;
    std::vector<double> prev_;
};

/// Largest deviations from the stack invariants.
struct InvariantReport {
    double level_sum_error = 0.0; // max over levels of |sum of P over C_b - 1|
    double parent_error = 0.0;    // max over internal nodes of |P(parent) - sum of P(children)|
    bool counts_ok = true;        // every level holds exactly N particles

    [[nodiscard]] bool ok(double tol = 1e-9) const
    {
        return counts_ok && level_sum_error <= tol && parent_error <= tol;
    }
};

inline InvariantReport check_invariants(const FilterStack& stack)
{
    InvariantReport r;
    const ClusterTree& tree = stack.tree();
    const auto& probs = stack.probabilities();
    const std::size_t n = stack.leaf_particles().size();
    for (double b : tree.levels()) {
        double sum = 0.0;
        for (NodeId c : tree.alive_at(b)) {
            sum += probs[index(c)];
        }
        r.level_sum_error = std::max(r.level_sum_error, std::abs(sum - 1.0));
        r.counts_ok = r.counts_ok && stack.level_particle_count(b) == n;
    }
    for (const auto& node : tree.nodes()) {
        if (node.children.empty()) {
            continue;
        }
        double sum = 0.0;
        for (NodeId c : node.children) {
            sum += probs[index(c)];
        }
        r.parent_error = std::max(r.parent_error, std::abs(probs[index(node.id)] - sum));
    }
    return r;
}

/// Single-node tree whose only class carries the root's dynamics.
inline std::pair<std::shared_ptr<const ClusterTree>, std::shared_ptr<const DynamicsSet>>
collapse_to_root(const ClusterTree& tree, const DynamicsSet& dynamics)
{
    std::vector<ClusterNode> nodes{ClusterNode{node_id(0), {0}, 0.0, unbounded, std::nullopt, {}}};
    auto collapsed = std::make_shared<const ClusterTree>(std::move(nodes), std::vector<std::string>{"root"});
    auto dyn = std::make_shared<const DynamicsSet>(
        std::vector<ClassDynamics>{dynamics[tree.root()].relabeled(node_id(0))});
    return {std::move(collapsed), std::move(dyn)};
}

} // namespace mhpf
