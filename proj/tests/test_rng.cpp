#include <gtest/gtest.h>

#include "denjoy/rng.hpp"

using namespace denjoy;

// Known-answer vectors from the Random123 distribution (kat_vectors, philox4x32_10).
TEST(Philox, KnownAnswers) {
    auto z = philox4x32_10({0, 0, 0, 0}, {0, 0});
    EXPECT_EQ(z[0], 0x6627e8d5u);
    EXPECT_EQ(z[1], 0xe169c58du);
    EXPECT_EQ(z[2], 0xbc57ac4cu);
    EXPECT_EQ(z[3], 0x9b00dbd8u);
    auto f = philox4x32_10({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu}, {0xffffffffu, 0xffffffffu});
    EXPECT_EQ(f[0], 0x408f276du);
    EXPECT_EQ(f[1], 0x41c83b0eu);
    EXPECT_EQ(f[2], 0xa20bc7c6u);
    EXPECT_EQ(f[3], 0x6d5451fdu);
    auto p = philox4x32_10({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u}, {0xa4093822u, 0x299f31d0u});
    EXPECT_EQ(p[0], 0xd16cfe09u);
    EXPECT_EQ(p[1], 0x94fdccebu);
    EXPECT_EQ(p[2], 0x5001e420u);
    EXPECT_EQ(p[3], 0x24126ea1u);
}

TEST(Rng, Reproducible) {
    Rng a = Rng::substream(42, 3), b = Rng::substream(42, 3), c = Rng::substream(42, 4);
    bool differs = false;
    for (int i = 0; i < 100; ++i) {
        const auto x = a(), y = b(), z = c();
        EXPECT_EQ(x, y);
        differs |= (x != z);
    }
    EXPECT_TRUE(differs);
}

TEST(Rng, UniformAndBelow) {
    Rng r(1);
    double s = 0;
    int counts[3] = {0, 0, 0};
    for (int i = 0; i < 100000; ++i) {
        const double u = r.uniform();
        ASSERT_GE(u, 0.0);
        ASSERT_LT(u, 1.0);
        s += u;
        counts[r.below(3)]++;
    }
    EXPECT_NEAR(s / 100000, 0.5, 0.005);
    for (int c : counts) EXPECT_NEAR(c / 100000.0, 1.0 / 3, 0.01);
}
