#include <gtest/gtest.h>

#include <functional>
#include <random>

#include "wfl/scene.hpp"

using namespace wfl;

namespace {

Scene room() {
  Scene s;
  s.extent_x = 6;
  s.extent_y = 6;
  s.array = ArrayConfig::uniform_linear(4, {0, -2.5}, 0.05);
  s.walls = {{{-3.5, -3.5}, {-3.5, 2.0}}, {{3.5, -1.0}, {3.5, 3.5}}, {{-1.0, 3.2}, {2.0, 3.2}},
             {{0.5, 0.0}, {1.5, 1.0}}};
  s.walls[2].reflection_gain = cplx(0.5, 0.1);
  return s;
}

}  // namespace

TEST(ReflectPoint, Examples) {
  const Wall xaxis{{-1, 0}, {1, 0}};
  Vec2 r = reflect_point({0, 1}, xaxis);
  EXPECT_NEAR(r.x, 0, 1e-15);
  EXPECT_NEAR(r.y, -1, 1e-15);
  r = reflect_point({0.3, 0}, xaxis);
  EXPECT_NEAR(r.x, 0.3, 1e-15);
  EXPECT_NEAR(r.y, 0, 1e-15);
  r = reflect_point({2, 3}, Wall{{0, 0}, {0, 5}});
  EXPECT_NEAR(r.x, -2, 1e-15);
  EXPECT_NEAR(r.y, 3, 1e-15);
  EXPECT_THROW(reflect_point({1, 1}, Wall{{0, 0}, {0, 0}}), InvalidGeometry);
}

TEST(ReflectPoint, Involution) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-5, 5);
  for (int i = 0; i < 1000; ++i) {
    const Wall w{{u(rng), u(rng)}, {u(rng), u(rng)}};
    if (w.degenerate()) continue;
    const Vec2 p{u(rng), u(rng)};
    EXPECT_LT(distance(reflect_point(reflect_point(p, w), w), p), 1e-11);
  }
}

TEST(VirtualSources, Counts) {
  Scene s;
  s.array = ArrayConfig({{0, -6}});
  EXPECT_EQ(enumerate_virtual_sources(s, 0, 2).size(), 1u);
  s.walls = {{{-5, 5}, {5, 5}}};
  EXPECT_EQ(enumerate_virtual_sources(s, 0, 2).size(), 2u);
  s.walls.push_back({{-5, -5}, {-5, 4}});
  s.walls.push_back({{5, -5}, {5, 4}});
  EXPECT_EQ(enumerate_virtual_sources(s, 0, 2).size(), 10u);
  EXPECT_EQ(enumerate_virtual_sources(s, 0, 1).size(), 4u);
  EXPECT_EQ(enumerate_virtual_sources(s, 0, 0).size(), 1u);
  EXPECT_THROW(enumerate_virtual_sources(s, 0, 3), InvalidArgument);
  EXPECT_THROW(enumerate_virtual_sources(s, 1, 2), InvalidArgument);
}

// Oracle: recursive enumeration of ordered wall sequences without back-to-back repeats.
TEST(VirtualSources, CountMatchesBruteForceAndGainsAreProducts) {
  for (std::size_t nw = 0; nw <= 6; ++nw) {
    Scene s;
    s.array = ArrayConfig({{0.1, -0.2}});
    for (std::size_t w = 0; w < nw; ++w) {
      const double ang = 0.7 * static_cast<double>(w) + 0.1;
      const Vec2 c = from_polar(4.0, ang);
      s.walls.push_back({c - from_polar(1.0, ang + 1.5), c + from_polar(1.0, ang + 1.5),
                         std::polar(0.5 + 0.05 * static_cast<double>(w), 0.3 * static_cast<double>(w))});
    }
    std::size_t brute = 0;
    std::function<void(int, std::size_t)> rec = [&](int depth, std::size_t last) {
      ++brute;
      if (depth == 2) return;
      for (std::size_t w = 0; w < nw; ++w)
        if (w != last) rec(depth + 1, w);
    };
    rec(0, static_cast<std::size_t>(-1));
    const auto src = enumerate_virtual_sources(s, 0, 2);
    EXPECT_EQ(src.size(), brute);
    EXPECT_EQ(src.size(), 1 + nw + nw * (nw ? nw - 1 : 0));
    for (const auto& v : src) {
      cplx g{1.0, 0.0};
      Vec2 img = s.array[0];
      for (std::size_t w : v.mirror_walls) {
        g *= s.walls[w].reflection_gain;
        img = reflect_point(img, s.walls[w]);
      }
      EXPECT_EQ(v.gain, g);
      EXPECT_EQ(v.order, static_cast<int>(v.mirror_walls.size()));
      EXPECT_LT(distance(v.position, img), 1e-12);
      if (v.order == 0) {
        EXPECT_EQ(v.gain, cplx(1.0, 0.0));
        EXPECT_EQ(v.position.x, s.array[0].x);
      }
    }
  }
}

TEST(PathVisible, Examples) {
  Scene s;
  s.array = ArrayConfig({{0, -4}});
  const auto src = enumerate_virtual_sources(s, 0, 2);
  EXPECT_TRUE(path_visible({1, 1}, src[0], s));
  s.walls = {{{-1, 0}, {1, 0}}};
  const auto blocked = enumerate_virtual_sources(s, 0, 0);
  EXPECT_FALSE(path_visible({0, 1}, blocked[0], s));
  EXPECT_TRUE(path_visible({3, 1}, blocked[0], s));

  // Mirror wall x = 2 for y in [-1, 1]; antenna at (0, 0).
  Scene m;
  m.array = ArrayConfig({{0, 0}});
  m.walls = {{{2, -1}, {2, 1}}};
  const auto ms = enumerate_virtual_sources(m, 0, 1);
  ASSERT_EQ(ms.size(), 2u);
  EXPECT_TRUE(path_visible({0, 0.5}, ms[1], m));   // specular point (2, 0.25)
  EXPECT_FALSE(path_visible({0, 4}, ms[1], m));    // specular point (2, 2): off the segment
  EXPECT_FALSE(path_visible({3, 0}, ms[1], m));    // behind the wall
}

namespace {

bool leg_clear(const Vec2& p, const Vec2& q, const Scene& s, std::size_t skip1, std::size_t skip2,
               double step) {
  // Ray march: a wall blocks if consecutive samples fall on opposite sides of
  // its line at a point within the segment.
  const double len = distance(p, q);
  const auto n = static_cast<std::size_t>(std::ceil(len / step)) + 1;
  for (std::size_t w = 0; w < s.walls.size(); ++w) {
    if (w == skip1 || w == skip2) continue;
    const Wall& wall = s.walls[w];
    const Vec2 e = wall.b - wall.a;
    Vec2 prev = p;
    double sprev = cross(e, prev - wall.a);
    for (std::size_t i = 1; i <= n; ++i) {
      const Vec2 cur = p + (q - p) * (static_cast<double>(i) / static_cast<double>(n));
      const double scur = cross(e, cur - wall.a);
      if ((sprev > 0) != (scur > 0) && sprev != 0 && scur != 0) {
        const double t = sprev / (sprev - scur);
        const Vec2 hit = prev + (cur - prev) * t;
        const double along = dot(hit - wall.a, e) / norm_sq(e);
        if (along >= 0 && along <= 1) return false;
      }
      prev = cur;
      sprev = scur;
    }
  }
  return true;
}

/// Brute-force reflection points: minimize path length over dense wall parameters.
std::optional<std::vector<Vec2>> brute_bounces(const Vec2& x, const VirtualSource& src, const Scene& s,
                                               double* edge_gap) {
  const Vec2 a = s.array[src.antenna_index];
  auto wp = [&](std::size_t w, double t) { return s.walls[w].a + (s.walls[w].b - s.walls[w].a) * t; };
  *edge_gap = 1e9;
  if (src.order == 1) {
    const std::size_t w = src.mirror_walls[0];
    double best = 1e300, bt = 0;
    const int n = 20000;
    for (int i = 0; i <= n; ++i) {
      const double t = static_cast<double>(i) / n;
      const double l = distance(x, wp(w, t)) + distance(wp(w, t), a);
      if (l < best) best = l, bt = t;
    }
    const double len = distance(s.walls[w].a, s.walls[w].b);
    *edge_gap = std::min(bt, 1 - bt) * len;
    // Same side of the wall line is required for a reflection.
    const Vec2 e = s.walls[w].b - s.walls[w].a;
    if ((cross(e, x - s.walls[w].a) > 0) != (cross(e, a - s.walls[w].a) > 0)) return std::nullopt;
    if (bt == 0.0 || bt == 1.0) return std::nullopt;
    return std::vector<Vec2>{wp(w, bt)};
  }
  const std::size_t w1 = src.mirror_walls[0], w2 = src.mirror_walls[1];
  double lo1 = 0, hi1 = 1, lo2 = 0, hi2 = 1, b1 = 0, b2 = 0;
  for (int round = 0; round < 6; ++round) {
    double best = 1e300;
    const int n = 120;
    for (int i = 0; i <= n; ++i)
      for (int j = 0; j <= n; ++j) {
        const double t1 = lo1 + (hi1 - lo1) * i / n, t2 = lo2 + (hi2 - lo2) * j / n;
        const double l = distance(a, wp(w1, t1)) + distance(wp(w1, t1), wp(w2, t2)) + distance(wp(w2, t2), x);
        if (l < best) best = l, b1 = t1, b2 = t2;
      }
    const double r1 = (hi1 - lo1) / 10, r2 = (hi2 - lo2) / 10;
    lo1 = std::max(0.0, b1 - r1), hi1 = std::min(1.0, b1 + r1);
    lo2 = std::max(0.0, b2 - r2), hi2 = std::min(1.0, b2 + r2);
  }
  const double len1 = distance(s.walls[w1].a, s.walls[w1].b), len2 = distance(s.walls[w2].a, s.walls[w2].b);
  *edge_gap = std::min({b1 * len1, (1 - b1) * len1, b2 * len2, (1 - b2) * len2});
  if (b1 < 1e-9 || b1 > 1 - 1e-9 || b2 < 1e-9 || b2 > 1 - 1e-9) return std::nullopt;
  // Specular condition: consecutive points must lie on the reflecting side of each wall.
  auto side = [&](std::size_t w, const Vec2& p) {
    return cross(s.walls[w].b - s.walls[w].a, p - s.walls[w].a) > 0;
  };
  if (side(w1, a) != side(w1, wp(w2, b2))) return std::nullopt;
  if (side(w2, wp(w1, b1)) != side(w2, x)) return std::nullopt;
  return std::vector<Vec2>{wp(w1, b1), wp(w2, b2)};
}

}  // namespace

TEST(PathVisible, AgreesWithRayMarchOracle) {
  const Scene s = room();
  const double step = 0.0857 / 20;
  std::mt19937_64 rng(42);
  std::vector<VirtualSource> all;
  for (std::size_t j = 0; j < s.array.size(); ++j)
    for (auto& v : enumerate_virtual_sources(s, j, 2)) all.push_back(v);
  std::uniform_int_distribution<std::size_t> pick(0, all.size() - 1);
  int agree = 0, total = 0, order2 = 0;
  for (int trial = 0; trial < 10000; ++trial) {
    const Vec2 x = sample_location(s, rng);
    const auto& src = all[pick(rng)];
    if (src.order == 2 && ++order2 > 400) continue;  // 2-D oracle is costly; sample a subset
    const Vec2 a = s.array[src.antenna_index];
    bool oracle = false;
    double edge_gap = 1e9;
    if (src.order == 0) {
      oracle = leg_clear(x, a, s, detail::kNoWall, detail::kNoWall, step);
    } else if (const auto b = brute_bounces(x, src, s, &edge_gap)) {
      std::vector<Vec2> pts{a};
      for (const auto& p : *b) pts.push_back(p);
      pts.push_back(x);
      oracle = true;
      for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
        const std::size_t skip1 = i == 0 ? detail::kNoWall : src.mirror_walls[i - 1];
        const std::size_t skip2 = i < src.mirror_walls.size() ? src.mirror_walls[i] : detail::kNoWall;
        oracle = oracle && leg_clear(pts[i], pts[i + 1], s, skip1, skip2, step);
      }
    }
    const bool got = path_visible(x, src, s);
    ++total;
    if (got == oracle) {
      ++agree;
    } else {
      EXPECT_LT(edge_gap, 0.0857 / 10) << "disagreement away from a wall endpoint at (" << x.x << ", "
                                       << x.y << ")";
    }
  }
  EXPECT_GE(agree, static_cast<int>(0.99 * total));
}

TEST(SceneValidation, RejectsBadScenes) {
  Scene s;
  s.array = ArrayConfig({{0, 0}});
  EXPECT_NO_THROW(s.validate());
  Scene bad = s;
  bad.extent_x = 0;
  EXPECT_THROW(bad.validate(), InvalidGeometry);
  bad = s;
  bad.walls = {{{0, 0}, {0, 0}}};
  EXPECT_THROW(bad.validate(), InvalidGeometry);
  bad = s;
  bad.exclusions = {{{4, 4}, {6, 6}}};
  EXPECT_THROW(bad.validate(), InvalidGeometry);
  bad = s;
  bad.exclusions = {{{-5, -5}, {5, 5}}};
  EXPECT_THROW(bad.validate(), EmptyRegion);
  bad = s;
  bad.walls = {{{0, 1}, {1, 1}, cplx(1.5, 0)}};
  EXPECT_THROW(bad.validate(), InvalidGeometry);
}

TEST(SceneSampling, UniformOutsideExclusions) {
  Scene s;
  s.array = ArrayConfig({{0, -6}});
  s.exclusions = {{{-5, -5}, {0, 5}}};
  EXPECT_NEAR(s.feasible_area(), 50.0, 1e-12);
  std::mt19937_64 rng(3);
  for (int i = 0; i < 5000; ++i) {
    const Vec2 p = sample_location(s, rng);
    EXPECT_TRUE(s.in_location_space(p));
    EXPECT_GT(p.x, 0.0);
  }
}

TEST(SceneSampling, FeasibleAreaWithOverlappingExclusions) {
  Scene s;
  s.array = ArrayConfig({{0, -6}});
  s.exclusions = {{{-1, -1}, {1, 1}}, {{0, 0}, {2, 2}}};
  EXPECT_NEAR(s.feasible_area(), 100.0 - 7.0, 1e-12);
}
