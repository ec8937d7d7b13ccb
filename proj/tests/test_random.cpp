#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "kramers_spde/random.hpp"

using namespace kspde;

TEST(Philox, KnownAnswerVectors) {
    using C = Philox4x32::Counter;
    using K = Philox4x32::Key;
    EXPECT_EQ(Philox4x32::block(C{0, 0, 0, 0}, K{0, 0}), (C{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u}));
    EXPECT_EQ(Philox4x32::block(C{0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu}, K{0xffffffffu, 0xffffffffu}),
              (C{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu}));
    EXPECT_EQ(Philox4x32::block(C{0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u}, K{0xa4093822u, 0x299f31d0u}),
              (C{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u}));
}

TEST(NormalStream, Deterministic) {
    NormalStream a(42, 3), b(42, 3);
    for (int i = 0; i < 1000; ++i) EXPECT_EQ(a.normal(), b.normal());
    NormalStream c(42, 4), d(43, 3);
    NormalStream e(42, 3);
    int same_c = 0, same_d = 0;
    for (int i = 0; i < 1000; ++i) {
        const double x = e.normal();
        same_c += x == c.normal();
        same_d += x == d.normal();
    }
    EXPECT_EQ(same_c, 0);
    EXPECT_EQ(same_d, 0);
}

TEST(NormalStream, UniformInOpenInterval) {
    NormalStream s(7);
    double sum = 0.0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
        const double u = s.uniform();
        ASSERT_GT(u, 0.0);
        ASSERT_LT(u, 1.0);
        sum += u;
    }
    EXPECT_NEAR(sum / n, 0.5, 5 * std::sqrt(1.0 / 12 / n));
}

TEST(NormalStream, Moments) {
    NormalStream s(11);
    const int n = 1000000;
    double m1 = 0, m2 = 0, m3 = 0, m4 = 0;
    for (int i = 0; i < n; ++i) {
        const double x = s.normal();
        m1 += x;
        m2 += x * x;
        m3 += x * x * x;
        m4 += x * x * x * x;
    }
    m1 /= n;
    m2 /= n;
    m3 /= n;
    m4 /= n;
    EXPECT_NEAR(m1, 0.0, 5 / std::sqrt(n));
    EXPECT_NEAR(m2, 1.0, 5 * std::sqrt(2.0 / n));
    EXPECT_NEAR(m3, 0.0, 5 * std::sqrt(15.0 / n));
    EXPECT_NEAR(m4, 3.0, 5 * std::sqrt(96.0 / n));
}

TEST(NormalStream, StreamsUncorrelated) {
    const int n = 200000;
    NormalStream a(5, 0), b(5, 1);
    double c = 0.0;
    for (int i = 0; i < n; ++i) c += a.normal() * b.normal();
    EXPECT_NEAR(c / n, 0.0, 5 / std::sqrt(n));
}

TEST(NormalStream, FillMatchesSequentialDraws) {
    NormalStream a(9), b(9);
    std::vector<double> v(17);
    a.fill_normal(v);
    for (double x : v) EXPECT_EQ(x, b.normal());
    EXPECT_EQ(a.blocks_used(), b.blocks_used());
}
