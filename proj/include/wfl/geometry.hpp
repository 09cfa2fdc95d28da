#pragma once
// Planar vectors, axis-aligned rectangles and segment intersection.
//
// Everything here is header-only, allocation-free and constexpr where the
// standard library allows it. Coordinates are meters.

#include <algorithm>
#include <cmath>
#include <optional>

namespace wfl {

struct Vec2 {
  double x{0.0};
  double y{0.0};

  constexpr Vec2() = default;
  constexpr Vec2(double x_, double y_) : x(x_), y(y_) {}

  constexpr Vec2 operator+(const Vec2& r) const { return {x + r.x, y + r.y}; }
  constexpr Vec2 operator-(const Vec2& r) const { return {x - r.x, y - r.y}; }
  constexpr Vec2 operator-() const { return {-x, -y}; }
  constexpr Vec2 operator*(double s) const { return {x * s, y * s}; }
  constexpr Vec2 operator/(double s) const { return {x / s, y / s}; }
  constexpr Vec2& operator+=(const Vec2& r) {
    x += r.x;
    y += r.y;
    return *this;
  }
  constexpr Vec2& operator-=(const Vec2& r) {
    x -= r.x;
    y -= r.y;
    return *this;
  }
  constexpr bool operator==(const Vec2&) const = default;
};

constexpr Vec2 operator*(double s, const Vec2& v) { return v * s; }

constexpr double dot(const Vec2& a, const Vec2& b) { return a.x * b.x + a.y * b.y; }

/// z-component of the 3D cross product.
constexpr double cross(const Vec2& a, const Vec2& b) { return a.x * b.y - a.y * b.x; }

inline double norm(const Vec2& v) { return std::hypot(v.x, v.y); }

constexpr double norm_sq(const Vec2& v) { return dot(v, v); }

inline double distance(const Vec2& a, const Vec2& b) { return norm(a - b); }

/// Unit vector along v; returns {0,0} for |v| <= eps.
inline Vec2 normalized(const Vec2& v, double eps = 0.0) {
  const double n = norm(v);
  if (n <= eps) return {};
  return v / n;
}

/// Counter-clockwise rotation by 90 degrees.
constexpr Vec2 perp(const Vec2& v) { return {-v.y, v.x}; }

inline Vec2 from_polar(double r, double angle) { return {r * std::cos(angle), r * std::sin(angle)}; }

struct Rect {
  Vec2 min;
  Vec2 max;

  constexpr bool contains(const Vec2& p) const {
    return p.x >= min.x && p.x <= max.x && p.y >= min.y && p.y <= max.y;
  }
  /// Interior test; boundary points are not strictly inside.
  constexpr bool contains_strict(const Vec2& p) const {
    return p.x > min.x && p.x < max.x && p.y > min.y && p.y < max.y;
  }
  constexpr double width() const { return max.x - min.x; }
  constexpr double height() const { return max.y - min.y; }
  constexpr double area() const { return width() * height(); }
  constexpr Vec2 center() const { return {(min.x + max.x) / 2, (min.y + max.y) / 2}; }
  constexpr bool valid() const { return max.x > min.x && max.y > min.y; }

  Vec2 clamp(const Vec2& p) const {
    return {std::clamp(p.x, min.x, max.x), std::clamp(p.y, min.y, max.y)};
  }
  constexpr bool within(const Rect& outer) const {
    return min.x >= outer.min.x && min.y >= outer.min.y && max.x <= outer.max.x &&
           max.y <= outer.max.y;
  }
};

/// Parameters of the crossing point of segments p + t (q - p) and a + s (b - a).
struct SegmentHit {
  double t;  ///< along the first segment
  double s;  ///< along the second segment
};

/// Intersection of two segments' supporting lines, or nullopt when parallel.
/// Range checks are left to the caller so that tolerances stay explicit.
inline std::optional<SegmentHit> line_intersection(const Vec2& p, const Vec2& q, const Vec2& a,
                                                   const Vec2& b) {
  const Vec2 r = q - p;
  const Vec2 e = b - a;
  const double denom = cross(r, e);
  const double scale = norm(r) * norm(e);
  if (std::abs(denom) <= 1e-15 * scale) return std::nullopt;
  const Vec2 ap = a - p;
  return SegmentHit{cross(ap, e) / denom, cross(ap, r) / denom};
}

/// True when the open segment (p, q) properly crosses the closed segment [a, b].
/// `t_eps` trims the segment ends so that a path touching a wall at its own
/// endpoint is not reported as blocked.
inline bool segment_crosses(const Vec2& p, const Vec2& q, const Vec2& a, const Vec2& b,
                            double t_eps = 1e-12) {
  const auto hit = line_intersection(p, q, a, b);
  if (!hit) return false;
  return hit->t > t_eps && hit->t < 1.0 - t_eps && hit->s >= 0.0 && hit->s <= 1.0;
}

}  // namespace wfl
