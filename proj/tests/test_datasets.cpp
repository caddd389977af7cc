#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include <mhpf/datasets.hpp>
#include <mhpf/filtration.hpp>
#include <mhpf/geometry.hpp>

using namespace mhpf;

namespace {

std::vector<double> spacings(const Trajectory& t)
{
    std::vector<double> out;
    for (std::size_t i = 1; i < t.size(); ++i) {
        out.push_back(euclidean(t.points[i - 1], t.points[i]));
    }
    return out;
}

DensityGrid empty_grid(std::size_t w, std::size_t h)
{
    return DensityGrid{w, h, std::vector<double>(w * h, 0.0)};
}

} // namespace

TEST(Discretize, StraightSegmentGetsMidpoint)
{
    const auto t = discretize_uniform(polyline("s", {{0, 0}, {4, 2}}), 3);
    ASSERT_EQ(t.size(), 3U);
    EXPECT_EQ(t.points[1], (Point{2.0, 1.0}));
    EXPECT_EQ(t.points.front(), (Point{0.0, 0.0}));
    EXPECT_EQ(t.points.back(), (Point{4.0, 2.0}));
}

TEST(Discretize, UniformSpacingAndIdempotence)
{
    const auto t = discretize_uniform(polyline("z", {{0, 0}, {3, 0}, {3, 4}, {-1, 7}}), 37);
    const auto gaps = spacings(t);
    for (double g : gaps) {
        EXPECT_NEAR(g, gaps.front(), 1e-9 * gaps.front());
    }
    const auto again = discretize_uniform(polyline("s", {{0, 0}, {10, 0}}), 11);
    const auto twice = discretize_uniform(again, 11);
    for (std::size_t i = 0; i < again.size(); ++i) {
        EXPECT_NEAR(twice.points[i][0], again.points[i][0], 1e-9);
        EXPECT_NEAR(twice.points[i][1], again.points[i][1], 1e-9);
    }
}

TEST(Discretize, ArcLengthPreservedOnSmoothCurve)
{
    Trajectory dense{"arc", {}};
    for (int i = 0; i <= 2000; ++i) {
        const double a = std::numbers::pi * i / 2000.0;
        dense.points.push_back(Point{5.0 * std::cos(a), 5.0 * std::sin(a)});
    }
    const auto t = discretize_uniform(dense, 100);
    EXPECT_NEAR(arc_length(t), 5.0 * std::numbers::pi, 0.01 * 5.0 * std::numbers::pi);
    EXPECT_THROW(discretize_uniform(dense, 1), invalid_input);
    EXPECT_THROW(discretize_uniform(polyline("p", {{1, 1}, {1, 1}}), 5), invalid_input);
}

TEST(Junction, NoJitterBranchesAreIdentical)
{
    Rng rng(1);
    const auto ts = gen_junction(2, 7, 0.0, rng);
    ASSERT_EQ(ts.size(), 14U);
    for (std::size_t i = 0; i < 7; ++i) {
        EXPECT_EQ(frechet_distance(ts[0], ts[i]), 0.0);
        EXPECT_EQ(frechet_distance(ts[7], ts[7 + i]), 0.0);
    }
    EXPECT_GT(frechet_distance(ts[0], ts[7]), 1.0);
    EXPECT_THROW(gen_junction(1, 7, 0.0, rng), invalid_input);
}

TEST(Junction, BranchesMergeInternallyFirst)
{
    Rng rng(2);
    const auto ts = gen_junction(2, 7, 0.3, rng);
    const auto tree = cluster_trajectories(ts, 1);
    const auto& root = tree.node(tree.root());
    ASSERT_EQ(root.children.size(), 2U);
    std::vector<std::vector<std::size_t>> groups;
    for (NodeId c : root.children) {
        groups.push_back(tree.node(c).members);
    }
    std::sort(groups.begin(), groups.end());
    EXPECT_EQ(groups[0], (std::vector<std::size_t>{0, 1, 2, 3, 4, 5, 6}));
    EXPECT_EQ(groups[1], (std::vector<std::size_t>{7, 8, 9, 10, 11, 12, 13}));
}

TEST(FixedEndpoints, SharedStartAndEnd)
{
    Rng rng(3);
    const auto ts = gen_fixed_endpoints(13, rng);
    ASSERT_EQ(ts.size(), 13U);
    for (const auto& t : ts) {
        EXPECT_EQ(t.size(), 100U);
        EXPECT_EQ(t.points.front(), ts[0].points.front());
        EXPECT_EQ(t.points.back(), ts[0].points.back());
    }
}

TEST(Obstacles, NoPointInsideAnObstacle)
{
    Rng rng(4);
    const auto ts = gen_obstacle_world(33, rng);
    ASSERT_EQ(ts.size(), 33U);
    for (const auto& t : ts) {
        for (const auto& p : t.points) {
            for (const auto& r : obstacle_layout()) {
                ASSERT_FALSE(r.contains(p)) << t.id << " at (" << p[0] << ", " << p[1] << ")";
            }
        }
    }
}

TEST(Generators, DeterministicUnderSeed)
{
    auto twice = [](auto gen) {
        Rng a(77), b(77);
        const auto x = gen(a);
        const auto y = gen(b);
        ASSERT_EQ(x.size(), y.size());
        for (std::size_t i = 0; i < x.size(); ++i) {
            EXPECT_EQ(x[i].points, y[i].points);
        }
    };
    twice([](Rng& r) { return gen_junction(2, 7, 0.3, r); });
    twice([](Rng& r) { return gen_fixed_endpoints(13, r); });
    twice([](Rng& r) { return gen_obstacle_world(33, r); });
    twice([](Rng& r) {
        auto world = gen_harbour_grid(r);
        WalkConfig cfg;
        cfg.n_trajectories = 20;
        cfg.starts = world.starts;
        return walk_from_density(world.grid, cfg, r);
    });
}

TEST(Walk, FullPersistenceOnUniformGridIsStraight)
{
    DensityGrid g{60, 60, std::vector<double>(3600, 1.0)};
    WalkConfig cfg;
    cfg.n_trajectories = 30;
    cfg.max_steps = 20;
    cfg.direction_persistence = 1.0;
    cfg.starts = {Cell{30, 30}};
    cfg.n_points = 0;
    Rng rng(5);
    for (const auto& t : walk_from_density(g, cfg, rng)) {
        ASSERT_EQ(t.size(), 21U);
        const auto dx = t.points[1][0] - t.points[0][0];
        const auto dy = t.points[1][1] - t.points[0][1];
        for (std::size_t i = 1; i < t.size(); ++i) {
            EXPECT_EQ(t.points[i][0] - t.points[i - 1][0], dx);
            EXPECT_EQ(t.points[i][1] - t.points[i - 1][1], dy);
        }
    }
}

TEST(Walk, ConfinedToSingleCorridor)
{
    auto g = empty_grid(40, 10);
    for (std::size_t x = 0; x < 40; ++x) {
        g.at(x, 4) = 1.0;
        g.at(x, 5) = 1.0;
    }
    WalkConfig cfg;
    cfg.n_trajectories = 50;
    cfg.max_steps = 60;
    cfg.starts = {Cell{0, 4}};
    cfg.n_points = 0;
    Rng rng(6);
    for (const auto& t : walk_from_density(g, cfg, rng)) {
        for (const auto& p : t.points) {
            ASSERT_TRUE(p[1] == 4.0 || p[1] == 5.0);
        }
    }
}

TEST(Walk, DenseCorridorPreferredNineToOne)
{
    // a stem along y = 5 forks at x = 5 into corridors at y = 6 (dense) and y = 4 (sparse)
    auto g = empty_grid(30, 11);
    for (std::size_t x = 0; x < 5; ++x) {
        g.at(x, 5) = 1.0;
    }
    for (std::size_t x = 5; x < 30; ++x) {
        g.at(x, 6) = 0.9;
        g.at(x, 4) = 0.1;
    }
    WalkConfig cfg;
    cfg.n_trajectories = 200;
    cfg.max_steps = 40;
    cfg.starts = {Cell{0, 5}};
    cfg.n_points = 0;
    Rng rng(7);
    int dense = 0;
    for (const auto& t : walk_from_density(g, cfg, rng)) {
        ASSERT_NE(t.points.back()[1], 5.0);
        dense += t.points.back()[1] == 6.0 ? 1 : 0;
    }
    EXPECT_GE(dense, 160);
}

TEST(Walk, RejectsBadStarts)
{
    auto g = empty_grid(5, 5);
    g.at(2, 2) = 1.0;
    g.at(3, 2) = 1.0;
    WalkConfig cfg;
    cfg.starts = {Cell{0, 0}};
    Rng rng(8);
    EXPECT_THROW(walk_from_density(g, cfg, rng), invalid_input);
    cfg.starts = {Cell{9, 9}};
    EXPECT_THROW(walk_from_density(g, cfg, rng), invalid_input);
    cfg.starts.clear();
    EXPECT_THROW(walk_from_density(g, cfg, rng), invalid_input);
}

TEST(Harbour, GeneratesFullCorpus)
{
    Rng rng(9);
    auto world = gen_harbour_grid(rng);
    EXPECT_EQ(world.grid.width, 80U);
    EXPECT_EQ(world.grid.height, 60U);
    ASSERT_EQ(world.starts.size(), 5U);
    for (const auto& s : world.starts) {
        EXPECT_GT(world.grid.at(s.x, s.y), 0.0);
    }
    WalkConfig cfg;
    cfg.starts = world.starts;
    const auto ts = walk_from_density(world.grid, cfg, rng);
    ASSERT_EQ(ts.size(), 194U);
    for (const auto& t : ts) {
        EXPECT_EQ(t.size(), 100U);
        EXPECT_GT(arc_length(t), 5.0);
    }
}
