#include <gtest/gtest.h>

#include "wfl/radio.hpp"

using namespace wfl;

TEST(FreqGrid, DefaultBandLambda0) {
  const FreqGrid b = FreqGrid::default_band();
  ASSERT_EQ(b.size(), 64u);
  EXPECT_TRUE(b.is_uniform());
  EXPECT_DOUBLE_EQ(b.frequencies().front(), 3.5e9 - 10e6);
  EXPECT_DOUBLE_EQ(b.frequencies().back(), 3.5e9 + 10e6);
  // Oracle: mean of c / f_k computed in long double.
  long double acc = 0;
  for (double f : b.frequencies()) acc += static_cast<long double>(kSpeedOfLight) / f;
  EXPECT_NEAR(b.lambda0(), static_cast<double>(acc / 64), 1e-15);
  EXPECT_NEAR(b.lambda0(), 0.0857, 5e-5);
}

TEST(FreqGrid, Lambda0IsMeanWavelengthNotInverseMeanFrequency) {
  const FreqGrid b({1e9, 3e9});
  const double mean_lambda = (kSpeedOfLight / 1e9 + kSpeedOfLight / 3e9) / 2;
  EXPECT_DOUBLE_EQ(b.lambda0(), mean_lambda);
  EXPECT_GT(b.lambda0(), kSpeedOfLight / 2e9);
}

TEST(FreqGrid, RejectsBadInput) {
  EXPECT_THROW(FreqGrid(std::vector<double>{}), InvalidArgument);
  EXPECT_THROW(FreqGrid({2e9, 1e9}), InvalidArgument);
  EXPECT_THROW(FreqGrid({-1.0}), InvalidArgument);
  EXPECT_THROW(FreqGrid::uniform(1e9, 1e6, 0), InvalidArgument);
}

TEST(FreqGrid, SingleToneAndNonUniform) {
  EXPECT_DOUBLE_EQ(FreqGrid::single_wavelength(0.1).lambda0(), 0.1);
  EXPECT_DOUBLE_EQ(FreqGrid::uniform(2e9, 1e6, 1).frequencies()[0], 2e9);
  EXPECT_FALSE(FreqGrid({1e9, 1.1e9, 1.3e9}).is_uniform());
}

TEST(ArrayConfig, UniformLinearGeometry) {
  const auto a = ArrayConfig::uniform_linear(4, {1, 2}, 0.5);
  ASSERT_EQ(a.size(), 4u);
  EXPECT_DOUBLE_EQ(a[0].x, 1 - 0.75);
  EXPECT_DOUBLE_EQ(a[3].x, 1 + 0.75);
  EXPECT_DOUBLE_EQ(a[2].y, 2.0);
  EXPECT_NEAR(a.centroid().x, 1.0, 1e-15);
  const auto v = ArrayConfig::uniform_linear(3, {0, 0}, 1.0, std::numbers::pi / 2);
  EXPECT_NEAR(v[0].x, 0.0, 1e-15);
  EXPECT_NEAR(v[0].y, -1.0, 1e-15);
}

TEST(ArrayConfig, HalfWavelengthSpacing) {
  const FreqGrid b = FreqGrid::default_band();
  const auto a = ArrayConfig::half_wavelength_ula(64, {0, 0}, b);
  EXPECT_NEAR(distance(a[0], a[1]), b.lambda0() / 2, 1e-15);
}

TEST(ArrayConfig, RejectsDuplicates) {
  EXPECT_THROW(ArrayConfig({{0, 0}, {0, 0}}), InvalidGeometry);
  EXPECT_THROW(ArrayConfig(std::vector<Vec2>{}), InvalidArgument);
  EXPECT_THROW(ArrayConfig::uniform_linear(2, {0, 0}, 0.0), InvalidArgument);
}
