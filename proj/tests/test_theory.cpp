#include <gtest/gtest.h>

#include <random>

#include "support.hpp"
#include "wfl/theory.hpp"

using namespace wfl;

TEST(GridConstant, ClosedForm) {
  const double d = closed_form_delta();
  const double oracle = (std::sqrt(2.0) + std::log(1 + std::sqrt(2.0))) / 6.0;
  EXPECT_NEAR(d, 0.382598, 1e-6);
  EXPECT_DOUBLE_EQ(d, oracle);
  EXPECT_NEAR(std::round(d * 100) / 100, 0.38, 1e-15);
  EXPECT_NEAR(6 * d - std::sqrt(2.0), std::log(1 + std::sqrt(2.0)), 1e-15);
}

TEST(GridConstant, MonteCarloAgrees) {
  const auto mc = grid_error_constant_mc_estimate(1'000'000, 1);
  EXPECT_NEAR(mc.mean, 0.3826, 0.001);
  EXPECT_LE(std::abs(mc.mean - closed_form_delta()), 3 * mc.std_error);
  EXPECT_THROW(grid_error_constant_mc(10, 1), InvalidArgument);
}

TEST(GridConstant, NearestNodeDistance) {
  const double nu = 0.2;
  EXPECT_NEAR(nearest_node_distance({nu / 4, nu / 4}, nu), nu * std::sqrt(2.0) / 4, 1e-15);
  EXPECT_NEAR(nearest_node_distance({nu / 2, nu / 2}, nu), nu * std::sqrt(2.0) / 2, 1e-15);
  EXPECT_NEAR(nearest_node_distance({3 * nu, -nu}, nu), 0.0, 1e-15);
}

TEST(MinimaScan, RadialSpacingIsLambda0) {
  const FreqGrid band = FreqGrid::default_band();
  const auto model = make_exact(fixtures::far_los_scene(band), band, 0);
  const double lam = band.lambda0();
  EXPECT_NEAR(lam, 0.0857, 5e-5);
  const Vec2 x{0.5, -1.0};
  const Vec2 radial = x - Vec2{0, -35};
  const auto p = minima_spacing_scan(*model, x, radial, 10 * lam, lam / 200);
  ASSERT_GE(p.detected_minima.size(), 5u);
  for (double s : p.spacings()) {
    EXPECT_GE(s, 0.98 * lam);
    EXPECT_LE(s, 1.02 * lam);
  }
}

TEST(MinimaScan, TangentialBroadsideHasNoNearbyMinima) {
  const FreqGrid band = FreqGrid::default_band();
  const auto model = make_exact(fixtures::far_los_scene(band), band, 0);
  const double lam = band.lambda0();
  EXPECT_THROW(minima_spacing_scan(*model, {0, 0}, {1, 0}, 3 * lam, lam / 200), InsufficientMinima);
  EXPECT_THROW(minima_spacing_scan(*model, {0, 0}, {1, 0}, 3 * lam, lam / 50), InvalidArgument);
}

TEST(CircleCondition, Examples) {
  const VirtualSource src{{0, 0}, {1, 0}, 0, 0, {}};
  const auto z = circle_condition_residual({10, 0}, src, 0, 0.0857, 0.7);
  EXPECT_LT(z.phase, 1e-12);
  EXPECT_LT(z.amplitude, 1e-15);
  const auto one = circle_condition_residual({10, 0}, src, 1, 0.0857);
  EXPECT_LT(one.phase, 1e-12);
  EXPECT_NEAR(one.amplitude, 0.0857 / (10 * 10.0857), 1e-12);
  EXPECT_NEAR(one.amplitude, 8.5e-4, 1e-5);
  EXPECT_THROW(circle_condition_residual({0.05, 0}, src, -1, 0.0857), InvalidGeometry);
}

TEST(CircleCondition, PhaseIndependentOfAngle) {
  const VirtualSource src{{1, -3}, {1, 0}, 0, 0, {}};
  for (int k = -3; k <= 3; ++k)
    for (int a = 0; a < 16; ++a) {
      const auto r = circle_condition_residual({2, 4}, src, k, 0.0857, a * std::numbers::pi / 8);
      EXPECT_LT(r.phase, 1e-12);
      EXPECT_LE(r.amplitude, 2 * std::abs(k) * 0.0857 / std::pow(distance({2, 4}, {1, -3}), 2) + 1e-15);
    }
}

TEST(Injectivity, DistinctPairsAreSeparated) {
  const Propagation p(fixtures::far_los_scene(), FreqGrid::default_band(), 0);
  const auto r = injectivity_probe(p, 10000, 4, p.lambda0() / 100);
  EXPECT_EQ(r.pairs, 10000u);
  EXPECT_LT(r.max_similarity, 1 - 1e-9);
  const auto h = p.channel({1, 1});
  EXPECT_EQ(similarity(h, p.channel({1, 1})), 1.0);
}

TEST(Injectivity, MirrorSymmetricSceneBreaksIt) {
  // Array on the symmetry axis x = 0: (x, y) and (-x, y) see identical distances.
  Scene s;
  s.array = ArrayConfig::uniform_linear(16, {0, -8}, 0.0857 / 2, std::numbers::pi / 2);
  const Propagation p(s, FreqGrid::default_band(), 0);
  std::mt19937_64 rng(6);
  for (int t = 0; t < 20; ++t) {
    const Vec2 x = sample_location(s, rng);
    if (std::abs(x.x) < 0.1) continue;
    EXPECT_GT(similarity(p.channel(x), p.channel({-x.x, x.y})), 1 - 1e-9);
  }
  Scene single;
  single.array = ArrayConfig({{0, -8}});
  EXPECT_THROW(injectivity_probe(Propagation(single, FreqGrid::default_band(), 0), 10, 1), InvalidArgument);
}

TEST(EpsilonSweep, ValidationAndZeroEpsilonAtGridNode) {
  const auto prop = std::make_shared<const Propagation>(fixtures::far_los_scene(), FreqGrid::default_band(), 0);
  const GridSpec g = GridSpec::defaults(prop->lambda0());
  EXPECT_THROW(epsilon_sweep(prop, {0.1, 0.1}, {{0, 0}}, g, {}, 1), InvalidArgument);
  EXPECT_THROW(epsilon_sweep(prop, {-0.1}, {{0, 0}}, g, {}, 1), InvalidArgument);
  const Vec2 node = build_global_grid(prop->scene(), g.global_count)[517];
  const auto r = epsilon_sweep(prop, {0.0}, {node}, g, {}, 1);
  EXPECT_LT(r[0].median_error, 1e-9);
}

TEST(EpsilonSweep, MedianDoesNotGrowAsEpsilonShrinks) {
  const auto prop = std::make_shared<const Propagation>(fixtures::far_los_scene(), FreqGrid::default_band(), 0);
  std::mt19937_64 rng(15);
  std::vector<Vec2> eval;
  for (int i = 0; i < 25; ++i) eval.push_back(sample_location(prop->scene(), rng));
  const auto sweep = epsilon_sweep(prop, {0.1, 0.0}, eval, GridSpec::defaults(prop->lambda0()), {}, 3);
  EXPECT_EQ(median_inversions(sweep), 0u);
  EXPECT_LT(sweep.back().median_error, prop->lambda0() / 100);
}
