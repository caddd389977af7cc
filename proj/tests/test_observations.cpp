#include <gtest/gtest.h>

#include <cmath>

#include <mhpf/datasets.hpp>
#include <mhpf/observations.hpp>

#include "fixtures.hpp"

using namespace mhpf;

TEST(FineObservation, ZeroNoiseIsExact)
{
    Rng rng(1);
    const Point z{1.5, -2.0};
    EXPECT_EQ(gen_fine(z, 0.0, 10.0, rng).position, z);
    EXPECT_THROW(gen_fine(z, -0.1, 10.0, rng), invalid_input);
}

TEST(FineObservation, OneSidedOffsetsAndMean)
{
    Rng rng(2);
    const Point z{0.0, 0.0};
    const double psi = 0.05;
    const double scale = 20.0;
    const double width = psi * scale;
    const int n = 100000;
    double sx = 0.0, sy = 0.0;
    for (int i = 0; i < n; ++i) {
        const auto o = gen_fine(z, psi, scale, rng).position;
        ASSERT_GE(o[0], 0.0);
        ASSERT_GE(o[1], 0.0);
        ASSERT_LE(o[0], width);
        sx += o[0];
        sy += o[1];
    }
    const double se = width / std::sqrt(12.0 * n);
    EXPECT_NEAR(sx / n, width / 2.0, 3.0 * se);
    EXPECT_NEAR(sy / n, width / 2.0, 3.0 * se);
}

TEST(FineObservation, CenteredNoiseHasZeroMean)
{
    Rng rng(3);
    const int n = 100000;
    double s = 0.0;
    for (int i = 0; i < n; ++i) {
        const auto o = gen_fine(Point{0.0}, 0.1, 10.0, rng, NoiseMode::centered).position;
        ASSERT_LE(std::abs(o[0]), 0.5);
        s += o[0];
    }
    EXPECT_NEAR(s / n, 0.0, 3.0 / std::sqrt(12.0 * n));
}

TEST(CoarseObservation, ZeroNoiseOnTrajectoryNamesItsClass)
{
    Rng rng(4);
    const auto corpus = gen_fixed_endpoints(13, rng, 40);
    auto tree = std::make_shared<const ClusterTree>(cluster_trajectories(corpus, 1));
    const double level = default_coarse_level(*tree);
    const CoarseObserver obs(tree, corpus, level);
    // interior points only: the shared endpoints belong to every class
    for (std::size_t i = 0; i < corpus.size(); ++i) {
        const auto got = obs.observe(corpus[i].points[20], 0.0, 1.0, 10, rng);
        EXPECT_EQ(got.level, level);
        EXPECT_EQ(tree->ancestor_alive_at(node_id(i), level), got.cls) << "trajectory " << i;
    }
}

TEST(CoarseObservation, EquidistantTieGoesToSmallerId)
{
    const auto corpus = fixture::lines(2);
    const auto tree = fixture::tree_from({{0, 2}, {2, 0}});
    const CoarseObserver obs(tree, corpus, 0.0);
    Rng rng(5);
    EXPECT_EQ(obs.observe(Point{3.0, 1.0}, 0.0, 1.0, 10, rng).cls, node_id(0));
}

TEST(CoarseObservation, SmallNoiseMatchesNearestClassRule)
{
    Rng rng(6);
    const auto corpus = gen_fixed_endpoints(13, rng, 40);
    auto tree = std::make_shared<const ClusterTree>(cluster_trajectories(corpus, 1));
    const double level = default_coarse_level(*tree);
    const CoarseObserver obs(tree, corpus, level);
    for (int k = 0; k < 200; ++k) {
        const Point z{rng.uniform(0.0, 10.0), rng.uniform(-4.0, 4.0)};
        NodeId expected{};
        double best = std::numeric_limits<double>::infinity();
        for (NodeId c : tree->alive_at(level)) {
            for (std::size_t leaf : tree->node(c).members) {
                for (const auto& p : corpus[leaf].points) {
                    const double d = euclidean(p, z);
                    if (d < best) {
                        best = d;
                        expected = c;
                    }
                }
            }
        }
        const auto got = obs.observe(z, 1e-6, 1.0, 10, rng);
        EXPECT_EQ(got.cls, expected) << "z = (" << z[0] << ", " << z[1] << ")";
        EXPECT_TRUE(tree->alive(got.cls, level));
    }
}

TEST(CoarseObservation, JunctionBranchWinsAtMidLevel)
{
    Rng rng(7);
    const auto corpus = gen_junction(2, 7, 0.3, rng, 50);
    ASSERT_EQ(corpus.size(), 14U);
    auto tree = std::make_shared<const ClusterTree>(cluster_trajectories(corpus, 1));
    // the level holding the two branch clusters
    double level = 0.0;
    for (double b : tree->levels()) {
        if (tree->alive_at(b).size() == 2) {
            level = b;
            break;
        }
    }
    const CoarseObserver obs(tree, corpus, level);
    const NodeId branch0 = tree->ancestor_alive_at(node_id(0), level);
    for (std::size_t i = 0; i < 7; ++i) {
        ASSERT_EQ(tree->ancestor_alive_at(node_id(i), level), branch0);
    }
    const double scale = bounding_diagonal(corpus);
    // a point 80% of the way along the first arm
    const Point z{-10.0 * std::sin(std::numbers::pi / 3.0) * 0.8, 10.0 + 10.0 * std::cos(std::numbers::pi / 3.0) * 0.8};
    int wins = 0;
    for (int k = 0; k < 1000; ++k) {
        Rng draw = Rng(100).split(static_cast<std::uint64_t>(k));
        wins += obs.observe(z, 0.05, scale, 10, draw).cls == branch0 ? 1 : 0;
    }
    EXPECT_GE(wins, 950);
}

TEST(DefaultCoarseLevel, HalfTheLeaves)
{
    EXPECT_EQ(default_coarse_level(*fixture::four_leaf_tree()), 2.0);
    // three leaves: levels 1 and 2 are equally close to 1.5 classes; the smaller wins
    EXPECT_EQ(default_coarse_level(*fixture::tree_from({{0, 1, 3}, {1, 0, 2}, {3, 2, 0}})), 1.0);
}

TEST(Stream, MixedModeKeepsFineEveryStep)
{
    const auto corpus = fixture::lines(4, 100);
    const auto tree = fixture::four_leaf_tree();
    const CoarseObserver obs(tree, corpus, 2.0);
    ObsConfig cfg;
    cfg.coarse_prob = 0.5;
    const auto stream = generate_stream(corpus[1].points, cfg, obs, 10.0, Rng(8));
    ASSERT_EQ(stream.size(), 100U);
    int coarse = 0;
    for (const auto& step : stream) {
        ASSERT_FALSE(step.empty());
        EXPECT_TRUE(std::holds_alternative<FineObservation>(step.front()));
        for (const auto& o : step) {
            if (const auto* c = std::get_if<CoarseObservation>(&o)) {
                ++coarse;
                EXPECT_EQ(c->level, 2.0);
            }
        }
    }
    EXPECT_GT(coarse, 30);
    EXPECT_LT(coarse, 70);

    cfg.coarse_replaces_fine = true;
    for (const auto& step : generate_stream(corpus[1].points, cfg, obs, 10.0, Rng(8))) {
        EXPECT_EQ(step.size(), 1U);
    }
}

TEST(Stream, LeadInThenCoarseOnly)
{
    const auto corpus = fixture::lines(4, 100);
    const auto tree = fixture::four_leaf_tree();
    const CoarseObserver obs(tree, corpus, 2.0);
    ObsConfig cfg;
    cfg.mode = ObsMode::fine_lead_in_then_coarse;
    cfg.lead_in_fraction = 0.075;
    cfg.coarse_prob = 1.0;
    const auto stream = generate_stream(corpus[1].points, cfg, obs, 10.0, Rng(9));
    for (std::size_t t = 0; t < stream.size(); ++t) {
        ASSERT_EQ(stream[t].size(), 1U);
        EXPECT_EQ(std::holds_alternative<FineObservation>(stream[t][0]), t < 8) << "t = " << t;
    }
}

TEST(Stream, DeterministicForSeed)
{
    const auto corpus = fixture::lines(4, 30);
    const auto tree = fixture::four_leaf_tree();
    const CoarseObserver obs(tree, corpus, 2.0);
    const ObsConfig cfg;
    std::stringstream a, b;
    write_observations(a, generate_stream(corpus[2].points, cfg, obs, 10.0, Rng(10)));
    write_observations(b, generate_stream(corpus[2].points, cfg, obs, 10.0, Rng(10)));
    EXPECT_EQ(a.str(), b.str());
}

TEST(ObsConfig, Validation)
{
    ObsConfig c;
    c.coarse_prob = 1.5;
    EXPECT_THROW(c.validate(), invalid_input);
    c = ObsConfig{};
    c.n_coarse_samples = 0;
    EXPECT_THROW(c.validate(), invalid_input);
    c = ObsConfig{};
    c.psi = -1.0;
    EXPECT_THROW(c.validate(), invalid_input);
}
