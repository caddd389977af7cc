#pragma once

#include <algorithm>
#include <cstddef>
#include <limits>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "error.hpp"
#include "geometry.hpp"

namespace mhpf {

/// Identifier of a cluster node. Leaves are 0..M-1 in corpus order; merged
/// clusters follow in merge order, so every parent id exceeds its children's.
enum class NodeId : std::size_t {};

constexpr std::size_t index(NodeId id) noexcept { return static_cast<std::size_t>(id); }
constexpr NodeId node_id(std::size_t i) noexcept { return static_cast<NodeId>(i); }

inline constexpr double unbounded = std::numeric_limits<double>::infinity();

struct ClusterNode {
    NodeId id{};
    std::vector<std::size_t> members; // sorted leaf indices
    double birth = 0.0;
    double death = unbounded;
    std::optional<NodeId> parent;
    std::vector<NodeId> children;

    [[nodiscard]] bool alive_at(double b) const noexcept { return birth <= b && b < death; }
    [[nodiscard]] bool is_leaf() const noexcept { return children.empty(); }
};

/**
 * Single-linkage filtration over a trajectory corpus.
 *
 * Immutable once built. Node ids index into nodes(); leaves come first and
 * every internal node has a larger id than its children, so ascending id order
 * is a valid bottom-up traversal.
 */
class ClusterTree {
public:
    ClusterTree() = default;

    /// Builds a tree from explicit nodes and validates its structure.
    ClusterTree(std::vector<ClusterNode> nodes, std::vector<std::string> leaf_labels = {})
        : nodes_(std::move(nodes)), labels_(std::move(leaf_labels))
    {
        finish();
    }

    [[nodiscard]] std::size_t size() const noexcept { return nodes_.size(); }
    [[nodiscard]] std::size_t leaf_count() const noexcept { return leaf_count_; }
    [[nodiscard]] NodeId root() const noexcept { return root_; }
    [[nodiscard]] const std::vector<ClusterNode>& nodes() const noexcept { return nodes_; }
    [[nodiscard]] const std::vector<std::string>& leaf_labels() const noexcept { return labels_; }

    [[nodiscard]] bool contains(NodeId id) const noexcept { return index(id) < nodes_.size(); }
    [[nodiscard]] bool is_leaf(NodeId id) const noexcept { return index(id) < leaf_count_; }

    [[nodiscard]] const ClusterNode& node(NodeId id) const
    {
        check(id);
        return nodes_[index(id)];
    }

    [[nodiscard]] double birth(NodeId id) const { return node(id).birth; }

    /// C_b: nodes with birth <= b < death. Their members partition the leaves.
    [[nodiscard]] std::vector<NodeId> alive_at(double b) const
    {
        if (!(b >= 0.0)) {
            throw invalid_input("alive_at: level must be >= 0");
        }
        std::vector<NodeId> out;
        for (const auto& n : nodes_) {
            if (n.alive_at(b)) {
                out.push_back(n.id);
            }
        }
        return out;
    }

    [[nodiscard]] bool alive(NodeId id, double b) const { return node(id).alive_at(b); }

    [[nodiscard]] NodeId lowest_common_ancestor(NodeId a, NodeId b) const
    {
        check(a);
        check(b);
        while (a != b) {
            if (depth_[index(a)] > depth_[index(b)]) {
                a = *nodes_[index(a)].parent;
            } else if (depth_[index(b)] > depth_[index(a)]) {
                b = *nodes_[index(b)].parent;
            } else {
                a = *nodes_[index(a)].parent;
                b = *nodes_[index(b)].parent;
            }
        }
        return a;
    }

    /// Birth index of the lowest common ancestor; a node is its own ancestor.
    [[nodiscard]] double class_distance(NodeId a, NodeId b) const
    {
        return nodes_[index(lowest_common_ancestor(a, b))].birth;
    }

    /// The ancestor of `id` (possibly itself) that is alive at level b.
    [[nodiscard]] NodeId ancestor_alive_at(NodeId id, double b) const
    {
        check(id);
        if (!(b >= 0.0)) {
            throw invalid_input("ancestor_alive_at: level must be >= 0");
        }
        NodeId cur = id;
        while (!nodes_[index(cur)].alive_at(b)) {
            const auto& n = nodes_[index(cur)];
            if (!n.parent || b < n.birth) {
                throw invalid_input("ancestor_alive_at: node " + std::to_string(index(id)) +
                                    " has no ancestor alive at " + std::to_string(b));
            }
            cur = *n.parent;
        }
        return cur;
    }

    /// Distinct birth values in increasing order; each one starts a new level.
    [[nodiscard]] std::vector<double> levels() const
    {
        std::vector<double> out;
        for (const auto& n : nodes_) {
            out.push_back(n.birth);
        }
        std::sort(out.begin(), out.end());
        out.erase(std::unique(out.begin(), out.end()), out.end());
        return out;
    }

    [[nodiscard]] std::size_t depth(NodeId id) const { return depth_.at(index(id)); }

private:
    void check(NodeId id) const
    {
        if (!contains(id)) {
            throw invalid_input("unknown cluster node " + std::to_string(index(id)));
        }
    }

    void finish()
    {
        if (nodes_.empty()) {
            throw invalid_input("cluster tree has no nodes");
        }
        leaf_count_ = 0;
        std::size_t roots = 0;
        for (std::size_t i = 0; i < nodes_.size(); ++i) {
            const auto& n = nodes_[i];
            if (index(n.id) != i) {
                throw invalid_input("cluster node ids must equal their position");
            }
            if (n.is_leaf()) {
                if (i != leaf_count_) {
                    throw invalid_input("leaves must precede internal nodes");
                }
                ++leaf_count_;
                if (n.members.size() != 1 || n.members.front() != i) {
                    throw invalid_input("leaf " + std::to_string(i) + " must contain exactly itself");
                }
            } else {
                std::vector<std::size_t> merged;
                for (NodeId c : n.children) {
                    if (index(c) >= i) {
                        throw invalid_input("child ids must be smaller than their parent's");
                    }
                    const auto& child = nodes_[index(c)];
                    if (child.parent != n.id) {
                        throw invalid_input("parent link of node " + std::to_string(index(c)) + " is inconsistent");
                    }
                    if (child.death != n.birth) {
                        throw invalid_input("death of node " + std::to_string(index(c)) + " differs from parent birth");
                    }
                    merged.insert(merged.end(), child.members.begin(), child.members.end());
                }
                std::sort(merged.begin(), merged.end());
                if (n.children.size() < 2 || merged != n.members) {
                    throw invalid_input("internal node " + std::to_string(i) + " must merge >= 2 children exactly");
                }
            }
            if (!(n.birth >= 0.0) || n.birth > n.death) {
                throw invalid_input("node " + std::to_string(i) + " has invalid birth/death");
            }
            if (!n.parent) {
                ++roots;
                root_ = n.id;
                if (n.death != unbounded) {
                    throw invalid_input("root death must be unbounded");
                }
            }
        }
        if (roots != 1) {
            throw invalid_input("cluster tree must have exactly one root");
        }
        if (!labels_.empty() && labels_.size() != leaf_count_) {
            throw invalid_input("leaf label count differs from leaf count");
        }
        if (labels_.empty()) {
            for (std::size_t i = 0; i < leaf_count_; ++i) {
                labels_.push_back(std::to_string(i));
            }
        }
        depth_.assign(nodes_.size(), 0);
        for (std::size_t i = nodes_.size(); i-- > 0;) {
            if (nodes_[i].parent) {
                depth_[i] = depth_[index(*nodes_[i].parent)] + 1;
            }
        }
    }

    std::vector<ClusterNode> nodes_;
    std::vector<std::string> labels_;
    std::vector<std::size_t> depth_;
    std::size_t leaf_count_ = 0;
    NodeId root_{};
};

/**
 * Single-linkage agglomerative clustering.
 *
 * Keeps a working matrix between active clusters and applies the min update
 * when two clusters merge. Ties on the merge distance go to the pair with the
 * lexicographically smallest (smaller id, larger id). Leaves are born at 0.
 */
inline ClusterTree single_linkage(const DistanceMatrix& d, std::vector<std::string> leaf_labels = {})
{
    d.validate();
    const std::size_t m = d.size();
    if (m == 0) {
        throw invalid_input("single_linkage: empty distance matrix");
    }
    std::vector<ClusterNode> nodes;
    nodes.reserve(2 * m - 1);
    for (std::size_t i = 0; i < m; ++i) {
        nodes.push_back(ClusterNode{node_id(i), {i}, 0.0, unbounded, std::nullopt, {}});
    }

    std::vector<double> work(m * m);
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < m; ++j) {
            work[i * m + j] = d(i, j);
        }
    }
    std::vector<NodeId> slot_node(m);
    for (std::size_t i = 0; i < m; ++i) {
        slot_node[i] = node_id(i);
    }
    std::vector<std::size_t> active(m);
    for (std::size_t i = 0; i < m; ++i) {
        active[i] = i;
    }

    while (active.size() > 1) {
        std::size_t best_a = 0, best_b = 1;
        double best = unbounded;
        std::pair<std::size_t, std::size_t> best_key{};
        for (std::size_t x = 0; x < active.size(); ++x) {
            for (std::size_t y = x + 1; y < active.size(); ++y) {
                const double v = work[active[x] * m + active[y]];
                const auto ix = index(slot_node[active[x]]);
                const auto iy = index(slot_node[active[y]]);
                const std::pair key{std::min(ix, iy), std::max(ix, iy)};
                if (v < best || (v == best && key < best_key)) {
                    best = v;
                    best_key = key;
                    best_a = x;
                    best_b = y;
                }
            }
        }
        const std::size_t sa = active[best_a];
        const std::size_t sb = active[best_b];
        const NodeId na = slot_node[sa];
        const NodeId nb = slot_node[sb];

        ClusterNode merged;
        merged.id = node_id(nodes.size());
        merged.birth = best;
        merged.children = {std::min(na, nb), std::max(na, nb)};
        merged.members = nodes[index(na)].members;
        merged.members.insert(merged.members.end(), nodes[index(nb)].members.begin(), nodes[index(nb)].members.end());
        std::sort(merged.members.begin(), merged.members.end());
        nodes[index(na)].death = best;
        nodes[index(na)].parent = merged.id;
        nodes[index(nb)].death = best;
        nodes[index(nb)].parent = merged.id;

        for (std::size_t h : active) {
            const double v = std::min(work[sa * m + h], work[sb * m + h]);
            work[sa * m + h] = v;
            work[h * m + sa] = v;
        }
        work[sa * m + sa] = 0.0;
        slot_node[sa] = merged.id;
        active.erase(active.begin() + static_cast<std::ptrdiff_t>(best_b));
        nodes.push_back(std::move(merged));
    }
    return ClusterTree(std::move(nodes), std::move(leaf_labels));
}

inline ClusterTree cluster_trajectories(std::span<const Trajectory> ts, unsigned threads = 0)
{
    std::vector<std::string> labels;
    for (const auto& t : ts) {
        labels.push_back(t.id);
    }
    return single_linkage(distance_matrix(ts, threads), std::move(labels));
}

/// Indented text rendering of the tree, root first.
inline void write_dendrogram(std::ostream& out, const ClusterTree& tree)
{
    struct Frame {
        NodeId id;
        std::size_t indent;
    };
    std::vector<Frame> stack{{tree.root(), 0}};
    while (!stack.empty()) {
        const auto [id, indent] = stack.back();
        stack.pop_back();
        const auto& n = tree.node(id);
        out << std::string(indent * 2, ' ');
        if (n.is_leaf()) {
            out << "leaf " << index(id) << " '" << tree.leaf_labels()[index(id)] << "'\n";
        } else {
            out << "node " << index(id) << " birth=" << n.birth << " size=" << n.members.size() << '\n';
        }
        for (auto it = n.children.rbegin(); it != n.children.rend(); ++it) {
            stack.push_back({*it, indent + 1});
        }
    }
}

} // namespace mhpf
