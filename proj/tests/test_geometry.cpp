#include <gtest/gtest.h>

#include <random>

#include "wfl/geometry.hpp"

using namespace wfl;

TEST(Vec2, ArithmeticAndNorms) {
  const Vec2 a{3, 4};
  EXPECT_DOUBLE_EQ(norm(a), 5.0);
  EXPECT_DOUBLE_EQ(norm_sq(a), 25.0);
  EXPECT_DOUBLE_EQ(dot(a, Vec2{1, 0}), 3.0);
  EXPECT_DOUBLE_EQ(cross(Vec2{1, 0}, Vec2{0, 1}), 1.0);
  EXPECT_DOUBLE_EQ(distance(a, Vec2{0, 0}), 5.0);
  const Vec2 u = normalized(a);
  EXPECT_NEAR(norm(u), 1.0, 1e-15);
  EXPECT_EQ(normalized(Vec2{0, 0}).x, 0.0);
}

TEST(Vec2, PolarRoundTrip) {
  const Vec2 p = from_polar(2.0, 0.3);
  EXPECT_NEAR(norm(p), 2.0, 1e-15);
  EXPECT_NEAR(std::atan2(p.y, p.x), 0.3, 1e-15);
}

TEST(Rect, ContainmentAndClamp) {
  const Rect r{{-1, -2}, {1, 2}};
  EXPECT_TRUE(r.valid());
  EXPECT_DOUBLE_EQ(r.area(), 8.0);
  EXPECT_TRUE(r.contains({1, 2}));
  EXPECT_FALSE(r.contains({1.1, 0}));
  const Vec2 c = r.clamp({5, -5});
  EXPECT_DOUBLE_EQ(c.x, 1.0);
  EXPECT_DOUBLE_EQ(c.y, -2.0);
  EXPECT_TRUE((Rect{{0, 0}, {1, 1}}).within(r));
  EXPECT_FALSE((Rect{{0, 0}, {3, 1}}).within(r));
}

TEST(Segments, CrossingBasics) {
  EXPECT_TRUE(segment_crosses({-1, 0}, {1, 0}, {0, -1}, {0, 1}));
  EXPECT_FALSE(segment_crosses({-1, 0}, {-0.5, 0}, {0, -1}, {0, 1}));
  EXPECT_FALSE(segment_crosses({-1, 0}, {1, 0}, {-1, 1}, {1, 1}));  // parallel
  EXPECT_FALSE(segment_crosses({-1, 0}, {1, 0}, {0, 0.5}, {0, 1}));  // misses the wall
}

// Oracle: sign-of-orientation test for proper crossings on random segments.
TEST(Segments, MatchesOrientationOracle) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1, 1);
  auto orient = [](Vec2 a, Vec2 b, Vec2 c) { return cross(b - a, c - a); };
  int checked = 0;
  for (int i = 0; i < 20000; ++i) {
    const Vec2 p{u(rng), u(rng)}, q{u(rng), u(rng)}, a{u(rng), u(rng)}, b{u(rng), u(rng)};
    const double o1 = orient(p, q, a), o2 = orient(p, q, b), o3 = orient(a, b, p), o4 = orient(a, b, q);
    if (std::min({std::abs(o1), std::abs(o2), std::abs(o3), std::abs(o4)}) < 1e-9) continue;
    const bool oracle = (o1 > 0) != (o2 > 0) && (o3 > 0) != (o4 > 0);
    EXPECT_EQ(segment_crosses(p, q, a, b), oracle);
    ++checked;
  }
  EXPECT_GT(checked, 19000);
}
