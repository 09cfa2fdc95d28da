#pragma once
// Planar propagation scenes and image-method virtual sources.
//
// A scene is the location rectangle [-Lx/2, Lx/2] x [-Ly/2, Ly/2], a set of
// thin reflecting wall segments, axis-aligned exclusion rectangles (obstacle
// footprints where no user can stand) and the base-station array.
//
// Multipath is represented by virtual sources: the image of antenna j across
// an ordered sequence of walls. A reflected path from antenna j to x then
// contributes like a direct path from the image, provided the unfolded ray
// actually hits every mirror wall segment and is not blocked elsewhere. That
// test is done per location by path_visible(); enumeration itself does not
// depend on x and is cached by callers.

#include <algorithm>
#include <complex>
#include <cstddef>
#include <numbers>
#include <random>
#include <vector>

#include "wfl/errors.hpp"
#include "wfl/geometry.hpp"
#include "wfl/radio.hpp"

namespace wfl {

using cplx = std::complex<double>;

/// 0.7 e^{j pi/4}
inline cplx default_reflection_gain() { return std::polar(0.7, std::numbers::pi / 4); }

struct Wall {
  Vec2 a;
  Vec2 b;
  cplx reflection_gain{default_reflection_gain()};

  bool degenerate() const { return distance(a, b) < 1e-12; }
};

struct VirtualSource {
  Vec2 position;
  cplx gain{1.0, 0.0};
  int order{0};
  std::size_t antenna_index{0};
  /// Walls in the order the wave meets them, starting at the antenna.
  std::vector<std::size_t> mirror_walls;
};

struct Scene {
  double extent_x{10.0};
  double extent_y{10.0};
  std::vector<Wall> walls;
  std::vector<Rect> exclusions;
  ArrayConfig array;

  Rect bounds() const { return {{-extent_x / 2, -extent_y / 2}, {extent_x / 2, extent_y / 2}}; }

  bool excluded(const Vec2& p) const {
    return std::any_of(exclusions.begin(), exclusions.end(),
                       [&](const Rect& r) { return r.contains(p); });
  }

  /// Membership in the location space: inside the extents and outside every exclusion.
  bool in_location_space(const Vec2& p) const { return bounds().contains(p) && !excluded(p); }

  /// Exact area of the location space (extent rectangle minus the union of exclusions).
  double feasible_area() const {
    const Rect box = bounds();
    std::vector<double> xs{box.min.x, box.max.x};
    std::vector<double> ys{box.min.y, box.max.y};
    for (const auto& r : exclusions) {
      xs.push_back(std::clamp(r.min.x, box.min.x, box.max.x));
      xs.push_back(std::clamp(r.max.x, box.min.x, box.max.x));
      ys.push_back(std::clamp(r.min.y, box.min.y, box.max.y));
      ys.push_back(std::clamp(r.max.y, box.min.y, box.max.y));
    }
    std::sort(xs.begin(), xs.end());
    xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
    std::sort(ys.begin(), ys.end());
    ys.erase(std::unique(ys.begin(), ys.end()), ys.end());
    double area = 0.0;
    for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
      for (std::size_t j = 0; j + 1 < ys.size(); ++j) {
        const Vec2 mid{(xs[i] + xs[i + 1]) / 2, (ys[j] + ys[j + 1]) / 2};
        if (!excluded(mid)) area += (xs[i + 1] - xs[i]) * (ys[j + 1] - ys[j]);
      }
    }
    return area;
  }

  /// Checks every structural invariant; throws on the first violation.
  void validate() const {
    if (!(extent_x > 0.0) || !(extent_y > 0.0))
      throw InvalidGeometry("scene extents must be positive");
    if (array.size() == 0) throw InvalidGeometry("scene has no antenna array");
    for (std::size_t i = 0; i < walls.size(); ++i) {
      if (walls[i].degenerate())
        throw InvalidGeometry("wall " + std::to_string(i) + " has coincident endpoints");
      const double g = std::abs(walls[i].reflection_gain);
      if (!(g > 0.0) || g > 1.0)
        throw InvalidGeometry("wall " + std::to_string(i) + " reflection gain must satisfy 0 < |g| <= 1");
    }
    const Rect box = bounds();
    for (std::size_t i = 0; i < exclusions.size(); ++i) {
      if (!exclusions[i].valid())
        throw InvalidGeometry("exclusion " + std::to_string(i) + " is empty");
      if (!exclusions[i].within(box))
        throw InvalidGeometry("exclusion " + std::to_string(i) + " exceeds the scene extents");
    }
    if (!(feasible_area() > 0.0)) throw EmptyRegion("exclusions cover the whole location space");
  }
};

/// Mirror image of p across the infinite line through the wall.
inline Vec2 reflect_point(const Vec2& p, const Wall& w) {
  if (w.degenerate()) throw InvalidGeometry("reflect_point: wall endpoints coincide");
  const Vec2 d = w.b - w.a;
  const Vec2 ap = p - w.a;
  const Vec2 foot = w.a + d * (dot(ap, d) / norm_sq(d));
  return foot * 2.0 - p;
}

/// The antenna itself plus its images across every wall sequence of length
/// <= max_order with no wall repeated back-to-back. Ordered by reflection
/// order, then lexicographically by wall sequence.
inline std::vector<VirtualSource> enumerate_virtual_sources(const Scene& scene,
                                                            std::size_t antenna_index,
                                                            int max_order) {
  if (max_order < 0 || max_order > 2)
    throw InvalidArgument("enumerate_virtual_sources: max_order must be 0, 1 or 2");
  if (antenna_index >= scene.array.size())
    throw InvalidArgument("enumerate_virtual_sources: antenna index out of range");
  for (const auto& w : scene.walls)
    if (w.degenerate()) throw InvalidGeometry("enumerate_virtual_sources: degenerate wall");

  std::vector<VirtualSource> out;
  out.push_back({scene.array[antenna_index], {1.0, 0.0}, 0, antenna_index, {}});
  const std::size_t nw = scene.walls.size();
  if (max_order >= 1) {
    for (std::size_t w = 0; w < nw; ++w) {
      out.push_back({reflect_point(scene.array[antenna_index], scene.walls[w]),
                     scene.walls[w].reflection_gain, 1, antenna_index, {w}});
    }
  }
  if (max_order >= 2) {
    for (std::size_t w1 = 0; w1 < nw; ++w1) {
      const Vec2 first = reflect_point(scene.array[antenna_index], scene.walls[w1]);
      for (std::size_t w2 = 0; w2 < nw; ++w2) {
        if (w2 == w1) continue;
        out.push_back({reflect_point(first, scene.walls[w2]),
                       scene.walls[w1].reflection_gain * scene.walls[w2].reflection_gain, 2,
                       antenna_index, {w1, w2}});
      }
    }
  }
  return out;
}

namespace detail {

inline bool leg_blocked(const Vec2& p, const Vec2& q, const Scene& scene, std::size_t skip_a,
                        std::size_t skip_b) {
  for (std::size_t w = 0; w < scene.walls.size(); ++w) {
    if (w == skip_a || w == skip_b) continue;
    if (segment_crosses(p, q, scene.walls[w].a, scene.walls[w].b)) return true;
  }
  return false;
}

inline constexpr std::size_t kNoWall = static_cast<std::size_t>(-1);

}  // namespace detail

/// Whether the path encoded by `src` physically reaches x.
///
/// The ray from x toward the image is unfolded wall by wall in reverse order:
/// each mirror wall segment (not just its line) must be hit, and no other
/// wall may cross any leg. Order-0 sources need an unobstructed straight line.
inline bool path_visible(const Vec2& x, const VirtualSource& src, const Scene& scene) {
  const Vec2 antenna = scene.array[src.antenna_index];
  const auto& mirrors = src.mirror_walls;
  if (mirrors.empty()) return !detail::leg_blocked(x, antenna, scene, detail::kNoWall, detail::kNoWall);

  // Image chain: images[0] = antenna, images[i] = reflection across mirrors[i-1].
  Vec2 images[3];
  images[0] = antenna;
  for (std::size_t i = 0; i < mirrors.size(); ++i)
    images[i + 1] = reflect_point(images[i], scene.walls[mirrors[i]]);

  Vec2 from = x;
  std::size_t from_wall = detail::kNoWall;
  for (std::size_t i = mirrors.size(); i-- > 0;) {
    const Wall& w = scene.walls[mirrors[i]];
    const auto hit = line_intersection(from, images[i + 1], w.a, w.b);
    if (!hit || !(hit->t > 0.0 && hit->t < 1.0) || hit->s < 0.0 || hit->s > 1.0) return false;
    const Vec2 bounce = from + (images[i + 1] - from) * hit->t;
    if (detail::leg_blocked(from, bounce, scene, from_wall, mirrors[i])) return false;
    from = bounce;
    from_wall = mirrors[i];
  }
  return !detail::leg_blocked(from, antenna, scene, from_wall, detail::kNoWall);
}

/// Uniform point of the location space by rejection sampling.
template <class Rng>
Vec2 sample_location(const Scene& scene, Rng& rng) {
  const Rect box = scene.bounds();
  std::uniform_real_distribution<double> ux(box.min.x, box.max.x);
  std::uniform_real_distribution<double> uy(box.min.y, box.max.y);
  for (int attempt = 0; attempt < 1'000'000; ++attempt) {
    const Vec2 p{ux(rng), uy(rng)};
    if (!scene.excluded(p)) return p;
  }
  throw EmptyRegion("sample_location: location space is (numerically) empty");
}

}  // namespace wfl
