#include <gtest/gtest.h>

#include <mhpf/metrics.hpp>

#include "fixtures.hpp"

using namespace mhpf;

TEST(Mse, SquaredEuclidean)
{
    EXPECT_EQ(mse(Point{1.0, 2.0}, Point{4.0, 6.0}), 25.0);
    EXPECT_EQ(mse(Point{1.0}, Point{1.0}), 0.0);
    EXPECT_THROW(mse(Point{1.0}, Point{1.0, 2.0}), invalid_input);
}

TEST(MapTreeDistance, UsesTruthAncestorAtLevel)
{
    const auto tree = fixture::four_leaf_tree();
    EXPECT_EQ(map_tree_distance(*tree, node_id(0), node_id(0), 0.0), 0.0);
    EXPECT_EQ(map_tree_distance(*tree, node_id(1), node_id(0), 0.0), 1.0);
    EXPECT_EQ(map_tree_distance(*tree, node_id(4), node_id(0), 0.0), 1.0);
    EXPECT_EQ(map_tree_distance(*tree, node_id(2), node_id(0), 0.0), 5.0);
    EXPECT_EQ(map_tree_distance(*tree, node_id(3), node_id(2), 0.0), 2.0);
    // at level 1.5 the truth is represented by node 4
    EXPECT_EQ(map_tree_distance(*tree, node_id(4), node_id(1), 1.5), 1.0);
    EXPECT_EQ(map_tree_distance(*tree, node_id(6), node_id(1), 7.0), 5.0);
}

TEST(MapTreeDistance, FromStack)
{
    const auto tree = fixture::four_leaf_tree();
    const auto s = FilterStack::from_particles(tree, fixture::dynamics_for(*tree),
                                               fixture::particles_with({{3, 0.7}, {2, 0.3}}), FilterConfig{}, Rng(1));
    EXPECT_EQ(map_tree_distance(s, node_id(3), 0.0), 0.0);
    EXPECT_EQ(map_tree_distance(s, node_id(2), 0.0), 2.0);
    EXPECT_EQ(map_tree_distance(s, node_id(0), 0.0), 5.0);
}

TEST(ConvergenceTime, FirstStepOfFinalRun)
{
    const std::vector<double> s{5, 5, 1, 5, 1, 1};
    EXPECT_EQ(convergence_time(s, 10.0), 4U);
    EXPECT_EQ(convergence_time(std::vector<double>{0, 0}, 10.0), 0U);
    EXPECT_FALSE(convergence_time(std::vector<double>{0, 5}, 10.0).has_value());
    EXPECT_FALSE(convergence_time(std::vector<double>{}, 10.0).has_value());
    // the threshold is inclusive
    EXPECT_EQ(convergence_time(std::vector<double>{5, 3}, 10.0, 0.3), 1U);
}

TEST(Summary, MeanAndSampleDeviation)
{
    const std::vector<double> x{2, 4, 4, 4, 5, 5, 7, 9};
    EXPECT_EQ(mean(x), 5.0);
    EXPECT_NEAR(stddev(x), std::sqrt(32.0 / 7.0), 1e-15);
    EXPECT_EQ(stddev(std::vector<double>{3.0}), 0.0);
}

// Reference p-values: two-sided Mann-Whitney U, normal approximation with tie and continuity corrections.
TEST(RankSum, MatchesReferenceValues)
{
    const std::vector<double> x1{1.1, 2.3, 0.4, 5.0, 3.3};
    const std::vector<double> y1{0.2, 0.1, 0.9, 1.5, 0.05, 0.3};
    EXPECT_NEAR(rank_sum_p_value(x1, y1), 0.03576376659097789, 1e-12);

    const std::vector<double> x2{1, 2, 2, 3, 3, 3};
    const std::vector<double> y2{2, 3, 4, 4, 5};
    EXPECT_NEAR(rank_sum_p_value(x2, y2), 0.08871369199677616, 1e-12);

    const std::vector<double> x3{0.5, 0.5, 0.5, 0.5, 1.0};
    const std::vector<double> y3{0.5, 2.0, 3.0};
    EXPECT_NEAR(rank_sum_p_value(x3, y3), 0.17185733906279932, 1e-12);

    std::vector<double> x4, y4;
    for (int i = 0; i < 20; ++i) {
        x4.push_back(i);
    }
    for (int i = 0; i < 15; ++i) {
        y4.push_back(i + 7.5);
    }
    EXPECT_NEAR(rank_sum_p_value(x4, y4), 0.017156651336835287, 1e-12);
}

TEST(RankSum, SymmetricAndDegenerate)
{
    const std::vector<double> x{1.1, 2.3, 0.4, 5.0, 3.3};
    const std::vector<double> y{0.2, 0.1, 0.9, 1.5, 0.05, 0.3};
    EXPECT_DOUBLE_EQ(rank_sum_p_value(x, y), rank_sum_p_value(y, x));
    EXPECT_EQ(rank_sum_p_value(x, std::vector<double>{}), 1.0);
    EXPECT_EQ(rank_sum_p_value(std::vector<double>{1, 1}, std::vector<double>{1, 1, 1}), 1.0);
}
