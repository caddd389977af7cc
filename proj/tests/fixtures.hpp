#pragma once

// Small trees, corpora and stacks shared by the filter tests.

#include <memory>
#include <vector>

#include <mhpf/dynamics.hpp>
#include <mhpf/filter_stack.hpp>
#include <mhpf/filtration.hpp>

namespace fixture {

using namespace mhpf;

inline std::shared_ptr<const ClusterTree> tree_from(const std::vector<std::vector<double>>& d)
{
    DistanceMatrix m(d.size());
    for (std::size_t i = 0; i < d.size(); ++i) {
        for (std::size_t j = i + 1; j < d.size(); ++j) {
            m.set(i, j, d[i][j]);
        }
    }
    return std::make_shared<const ClusterTree>(single_linkage(m));
}

// Parallel horizontal lines y = 2i, ten unit steps each.
inline std::vector<Trajectory> lines(std::size_t m, std::size_t points = 10)
{
    std::vector<Trajectory> out;
    for (std::size_t i = 0; i < m; ++i) {
        Trajectory t{"line-" + std::to_string(i), {}};
        for (std::size_t k = 0; k < points; ++k) {
            t.points.push_back(Point{static_cast<double>(k), 2.0 * static_cast<double>(i)});
        }
        out.push_back(std::move(t));
    }
    return out;
}

inline std::shared_ptr<const DynamicsSet> dynamics_for(const ClusterTree& tree, double kappa = 0.0)
{
    return std::make_shared<const DynamicsSet>(
        build_dynamics(tree, lines(tree.leaf_count()), DynamicsConfig{kappa, 0.5, std::nullopt, NoiseMode::one_sided}));
}

// Leaves 0..3: {0,1} merge at 1 (node 4), {2,3} at 2 (node 5), root at 5 (node 6).
inline std::shared_ptr<const ClusterTree> four_leaf_tree()
{
    return tree_from({{0, 1, 5, 6}, {1, 0, 7, 8}, {5, 7, 0, 2}, {6, 8, 2, 0}});
}

inline std::vector<Particle> particles_with(const std::vector<std::pair<std::size_t, double>>& cls_weight)
{
    std::vector<Particle> out;
    for (auto [c, w] : cls_weight) {
        out.push_back(Particle{Point{0.0, 2.0 * static_cast<double>(c)}, node_id(c), w});
    }
    return out;
}

} // namespace fixture
