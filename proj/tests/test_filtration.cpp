#include <gtest/gtest.h>

#include <algorithm>
#include <set>
#include <sstream>

#include <mhpf/datasets.hpp>
#include <mhpf/error.hpp>
#include <mhpf/filtration.hpp>

#include "oracles.hpp"

using namespace mhpf;

namespace {

DistanceMatrix to_matrix(const std::vector<std::vector<double>>& d)
{
    DistanceMatrix m(d.size());
    for (std::size_t i = 0; i < d.size(); ++i) {
        for (std::size_t j = i + 1; j < d.size(); ++j) {
            m.set(i, j, d[i][j]);
        }
    }
    return m;
}

// d(0,1)=1, d(0,2)=4, d(1,2)=2
ClusterTree hand_tree()
{
    return single_linkage(to_matrix({{0, 1, 4}, {1, 0, 2}, {4, 2, 0}}), {"a", "b", "c"});
}

std::vector<oracle::Merge> merges_of(const ClusterTree& t)
{
    std::vector<oracle::Merge> out;
    for (const auto& n : t.nodes()) {
        if (!n.is_leaf()) {
            out.push_back({n.birth, std::set<std::size_t>(n.members.begin(), n.members.end())});
        }
    }
    return out;
}

} // namespace

TEST(SingleLinkage, SingleTrajectory)
{
    const auto t = single_linkage(to_matrix({{0}}));
    ASSERT_EQ(t.size(), 1U);
    EXPECT_EQ(t.birth(t.root()), 0.0);
    EXPECT_EQ(t.node(t.root()).death, unbounded);
}

TEST(SingleLinkage, HandTrace)
{
    const auto t = hand_tree();
    ASSERT_EQ(t.size(), 5U);
    const NodeId ab = node_id(3), root = node_id(4);
    EXPECT_EQ(t.root(), root);
    EXPECT_EQ(t.birth(ab), 1.0);
    EXPECT_EQ(t.birth(root), 2.0);
    EXPECT_EQ(t.node(ab).members, (std::vector<std::size_t>{0, 1}));
    EXPECT_EQ(t.node(node_id(0)).death, 1.0);
    EXPECT_EQ(t.node(node_id(2)).death, 2.0);
    EXPECT_EQ(t.node(ab).death, 2.0);

    EXPECT_EQ(t.alive_at(0.0), (std::vector<NodeId>{node_id(0), node_id(1), node_id(2)}));
    EXPECT_EQ(t.alive_at(1.5), (std::vector<NodeId>{node_id(2), ab}));
    EXPECT_EQ(t.alive_at(2.0), (std::vector<NodeId>{root}));
    EXPECT_EQ(t.alive_at(100.0), (std::vector<NodeId>{root}));

    EXPECT_EQ(t.lowest_common_ancestor(node_id(0), node_id(1)), ab);
    EXPECT_EQ(t.lowest_common_ancestor(node_id(1), node_id(1)), node_id(1));
    EXPECT_EQ(t.lowest_common_ancestor(node_id(0), root), root);
    EXPECT_EQ(t.class_distance(node_id(0), node_id(2)), 2.0);
    EXPECT_EQ(t.class_distance(node_id(0), node_id(1)), 1.0);
    EXPECT_EQ(t.class_distance(ab, ab), 1.0);
    EXPECT_EQ(t.class_distance(node_id(2), node_id(2)), 0.0);
    EXPECT_THROW((void)t.class_distance(node_id(0), node_id(9)), invalid_input);
}

TEST(SingleLinkage, SharedParentDistance)
{
    // leaves 0..3; e = {0,1} at 1, g = {0,1,2} at 2, root at 5
    const auto t = single_linkage(
        to_matrix({{0, 1, 3, 6}, {1, 0, 2, 7}, {3, 2, 0, 5}, {6, 7, 5, 0}}));
    const NodeId e = node_id(4), g = node_id(5);
    ASSERT_EQ(t.node(g).members, (std::vector<std::size_t>{0, 1, 2}));
    EXPECT_EQ(t.class_distance(e, g), t.birth(g));
    EXPECT_EQ(t.class_distance(node_id(2), e), t.birth(g));
    EXPECT_EQ(t.class_distance(node_id(3), e), 5.0);
}

TEST(SingleLinkage, TiesMergeSmallestPairFirst)
{
    const auto t = single_linkage(to_matrix({{0, 1, 1}, {1, 0, 1}, {1, 1, 0}}));
    EXPECT_EQ(t.node(node_id(3)).members, (std::vector<std::size_t>{0, 1}));
    EXPECT_EQ(t.birth(node_id(3)), 1.0);
    EXPECT_EQ(t.birth(node_id(4)), 1.0);
    // the zero-height child is never alive, yet levels still partition the leaves
    EXPECT_EQ(t.alive_at(1.0), (std::vector<NodeId>{node_id(4)}));
}

TEST(SingleLinkage, MatchesNaiveOracle)
{
    Rng rng(77);
    for (int rep = 0; rep < 100; ++rep) {
        const std::size_t m = 2 + rng.index(11);
        const auto d = oracle::random_matrix(m, rng);
        const auto t = single_linkage(to_matrix(d));
        auto got = merges_of(t);
        auto want = oracle::single_linkage_naive(d);
        std::sort(got.begin(), got.end());
        std::sort(want.begin(), want.end());
        ASSERT_EQ(got, want) << "m=" << m;

        const auto coph = oracle::minimax_paths(d);
        for (std::size_t i = 0; i < m; ++i) {
            for (std::size_t j = 0; j < m; ++j) {
                if (i != j) {
                    ASSERT_EQ(t.class_distance(node_id(i), node_id(j)), coph[i][j]);
                }
            }
        }
        for (std::size_t a = 0; a < m; ++a) {
            for (std::size_t b = 0; b < m; ++b) {
                for (std::size_t c = 0; c < m; ++c) {
                    const double ac = t.class_distance(node_id(a), node_id(c));
                    ASSERT_LE(ac, std::max(t.class_distance(node_id(a), node_id(b)),
                                           t.class_distance(node_id(b), node_id(c))));
                }
            }
        }
    }
}

TEST(SingleLinkage, AliveSetsPartitionLeaves)
{
    Rng rng(8);
    const auto d = oracle::random_matrix(12, rng);
    const auto t = single_linkage(to_matrix(d));
    for (int rep = 0; rep < 100; ++rep) {
        const double b = rng.uniform(0.0, 11.0);
        std::vector<std::size_t> covered;
        for (NodeId c : t.alive_at(b)) {
            EXPECT_TRUE(t.alive(c, b));
            const auto& m = t.node(c).members;
            covered.insert(covered.end(), m.begin(), m.end());
        }
        std::sort(covered.begin(), covered.end());
        ASSERT_EQ(covered.size(), 12U);
        for (std::size_t i = 0; i < 12; ++i) {
            EXPECT_EQ(covered[i], i);
        }
    }
}

TEST(SingleLinkage, JunctionBirthsAreMonotone)
{
    Rng rng(3);
    const auto ts = gen_junction(2, 7, 0.3, rng);
    const auto t = cluster_trajectories(ts, 1);
    ASSERT_EQ(t.leaf_count(), 14U);
    double last = 0.0;
    for (std::size_t i = t.leaf_count(); i < t.size(); ++i) {
        EXPECT_GE(t.birth(node_id(i)), last);
        last = t.birth(node_id(i));
    }
    const auto levels = t.levels();
    EXPECT_TRUE(std::is_sorted(levels.begin(), levels.end()));
    EXPECT_EQ(t.alive_at(levels.back()), std::vector<NodeId>{t.root()});
}

TEST(ClusterTree, AncestorAliveAt)
{
    const auto t = hand_tree();
    EXPECT_EQ(t.ancestor_alive_at(node_id(0), 0.0), node_id(0));
    EXPECT_EQ(t.ancestor_alive_at(node_id(0), 1.5), node_id(3));
    EXPECT_EQ(t.ancestor_alive_at(node_id(2), 1.5), node_id(2));
    EXPECT_EQ(t.ancestor_alive_at(node_id(0), 3.0), node_id(4));
}

TEST(ClusterTree, RejectsMalformedStructure)
{
    auto nodes = hand_tree().nodes();
    nodes[3].birth = 1.5; // child deaths no longer match
    EXPECT_THROW(ClusterTree(nodes, {"a", "b", "c"}), invalid_input);
}

TEST(ClusterTree, Dendrogram)
{
    std::ostringstream os;
    write_dendrogram(os, hand_tree());
    EXPECT_EQ(os.str(), "node 4 birth=2 size=3\n"
                        "  leaf 2 'c'\n"
                        "  node 3 birth=1 size=2\n"
                        "    leaf 0 'a'\n"
                        "    leaf 1 'b'\n");
}
