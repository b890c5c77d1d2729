#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "openverse/error.hpp"
#include "openverse/world/animation.hpp"

using openverse::animate_rotation;

TEST(AnimateRotation, StartsAtFrom) {
    EXPECT_EQ(animate_rotation(0, 360, 10000, 0), 0);
}

TEST(AnimateRotation, LinearMidpoint) {
    EXPECT_EQ(animate_rotation(0, 360, 10000, 5000), 180);
}

TEST(AnimateRotation, WrapsAfterOneLoop) {
    const double expected = std::fmod(12500.0, 10000.0) / 10000.0 * 360.0;
    EXPECT_DOUBLE_EQ(expected, 90.0);
    EXPECT_DOUBLE_EQ(animate_rotation(0, 360, 10000, 12500), expected);
}

TEST(AnimateRotation, RejectsBadArguments) {
    EXPECT_THROW(animate_rotation(0, 360, 0, 1), openverse::Error);
    EXPECT_THROW(animate_rotation(0, 360, -5, 1), openverse::Error);
    EXPECT_THROW(animate_rotation(0, 360, 1000, -1), openverse::Error);
    EXPECT_THROW(animate_rotation(NAN, 360, 1000, 1), openverse::Error);
}

TEST(AnimateRotationProperty, PeriodicInDuration) {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> angle(-720, 720);
    std::uniform_int_distribution<int> dur(1, 20000);
    std::uniform_int_distribution<int> t(0, 100000);
    std::uniform_int_distribution<int> k(0, 50);
    for (int i = 0; i < 5000; ++i) {
        const double from = angle(rng), to = angle(rng);
        const double d = dur(rng), tt = t(rng);
        const double kk = k(rng);
        ASSERT_DOUBLE_EQ(animate_rotation(from, to, d, tt), animate_rotation(from, to, d, tt + kk * d))
            << from << " " << to << " " << d << " " << tt << " " << kk;
    }
}
