#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "d2dsim/rng.hpp"

using d2dsim::Rng;

TEST(Rng, SameSeedAndStreamRepeat)
{
    Rng a(5, 3);
    Rng b(5, 3);
    for (int i = 0; i < 100; ++i)
        EXPECT_EQ(a.next_u64(), b.next_u64());
}

TEST(Rng, StreamsDiffer)
{
    std::set<std::uint64_t> firsts;
    for (std::uint64_t s = 0; s < 1000; ++s)
        firsts.insert(Rng(1, s).next_u64());
    EXPECT_EQ(firsts.size(), 1000u);
    EXPECT_NE(Rng(1, 0).next_u64(), Rng(2, 0).next_u64());
}

TEST(Rng, UniformInUnitInterval)
{
    Rng r(1, 0);
    double sum = 0;
    for (int i = 0; i < 100000; ++i) {
        const double u = r.uniform();
        ASSERT_GE(u, 0.0);
        ASSERT_LT(u, 1.0);
        sum += u;
    }
    EXPECT_NEAR(sum / 1e5, 0.5, 0.005);
}

TEST(Rng, IndexCoversRange)
{
    Rng r(2, 0);
    std::vector<int> hits(7, 0);
    for (int i = 0; i < 70000; ++i)
        ++hits[r.index(7)];
    for (int h : hits)
        EXPECT_NEAR(h, 10000, 500);
}

TEST(Rng, ExponentialMoments)
{
    Rng r(3, 0);
    double s = 0, s2 = 0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
        const double x = r.exponential();
        ASSERT_GE(x, 0.0);
        s += x;
        s2 += x * x;
    }
    EXPECT_NEAR(s / n, 1.0, 0.01);
    EXPECT_NEAR(s2 / n, 2.0, 0.05);
}

TEST(Rng, NormalMoments)
{
    Rng r(4, 0);
    double s = 0, s2 = 0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
        const double x = r.normal();
        s += x;
        s2 += x * x;
    }
    EXPECT_NEAR(s / n, 0.0, 0.01);
    EXPECT_NEAR(s2 / n, 1.0, 0.01);
}

TEST(Rng, PoissonMean)
{
    for (double mean : {0.5, 12.0, 127.0, 2000.0}) {
        Rng r(6, 0);
        double s = 0, s2 = 0;
        const int n = 20000;
        for (int i = 0; i < n; ++i) {
            const double k = static_cast<double>(r.poisson(mean));
            s += k;
            s2 += k * k;
        }
        const double m = s / n;
        EXPECT_NEAR(m, mean, 4 * std::sqrt(mean / n)) << mean;
        EXPECT_NEAR(s2 / n - m * m, mean, 0.05 * mean + 0.05) << mean;
    }
    Rng r(6, 1);
    EXPECT_EQ(r.poisson(0.0), 0u);
}
