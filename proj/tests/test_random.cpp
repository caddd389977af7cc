#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include <mhpf/random.hpp>

using mhpf::Rng;

TEST(Rng, SameSeedSameSequence)
{
    Rng a(42), b(42);
    for (int i = 0; i < 100; ++i) {
        EXPECT_EQ(a(), b());
    }
}

TEST(Rng, SplitDependsOnlyOnSeedAndKey)
{
    Rng a(7);
    const Rng before = a.split(3);
    for (int i = 0; i < 10; ++i) {
        (void)a();
    }
    Rng after = a.split(3);
    Rng first = before;
    EXPECT_EQ(first(), after());
    EXPECT_NE(Rng(7).split(3)(), Rng(7).split(4)());
    EXPECT_NE(Rng(7).split(3)(), Rng(8).split(3)());
}

TEST(Rng, UniformInUnitInterval)
{
    Rng r(1);
    double sum = 0.0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) {
        const double u = r.uniform();
        ASSERT_GE(u, 0.0);
        ASSERT_LT(u, 1.0);
        sum += u;
    }
    EXPECT_NEAR(sum / n, 0.5, 0.01);
}

TEST(Rng, IndexCoversRangeEvenly)
{
    Rng r(2);
    std::vector<int> counts(7, 0);
    const int n = 70000;
    for (int i = 0; i < n; ++i) {
        const auto k = r.index(7);
        ASSERT_LT(k, 7U);
        ++counts[k];
    }
    for (int c : counts) {
        EXPECT_NEAR(c, n / 7, 400);
    }
}

TEST(Rng, NormalMoments)
{
    Rng r(3);
    double s = 0.0, s2 = 0.0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
        const double x = r.normal();
        s += x;
        s2 += x * x;
    }
    EXPECT_NEAR(s / n, 0.0, 0.01);
    EXPECT_NEAR(s2 / n, 1.0, 0.02);
}
