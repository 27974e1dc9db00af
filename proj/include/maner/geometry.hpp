#pragma once

#include <algorithm>
#include <cmath>

namespace maner {

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kSqrt2 = 1.41421356237309504880;

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  friend Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
  friend Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
  friend Vec2 operator*(Vec2 a, double s) { return {a.x * s, a.y * s}; }
  friend Vec2 operator*(double s, Vec2 a) { return {a.x * s, a.y * s}; }
  friend bool operator==(Vec2 a, Vec2 b) = default;
};

inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double norm(Vec2 a) { return std::hypot(a.x, a.y); }
inline double distance(Vec2 a, Vec2 b) { return norm(a - b); }

/// Axis-aligned rectangle, closed.
struct Rect {
  Vec2 min;
  Vec2 max;

  Vec2 center() const { return {(min.x + max.x) / 2, (min.y + max.y) / 2}; }
};

inline double distance(Vec2 p, const Rect& r) {
  const double dx = std::max({r.min.x - p.x, 0.0, p.x - r.max.x});
  const double dy = std::max({r.min.y - p.y, 0.0, p.y - r.max.y});
  return std::hypot(dx, dy);
}

inline double distance_point_segment(Vec2 p, Vec2 a, Vec2 b) {
  const Vec2 ab = b - a;
  const double len2 = dot(ab, ab);
  if (len2 <= 0.0) return distance(p, a);
  const double t = std::clamp(dot(p - a, ab) / len2, 0.0, 1.0);
  return distance(p, a + ab * t);
}

inline bool segments_intersect(Vec2 a, Vec2 b, Vec2 c, Vec2 d) {
  auto cross = [](Vec2 o, Vec2 p, Vec2 q) {
    return (p.x - o.x) * (q.y - o.y) - (p.y - o.y) * (q.x - o.x);
  };
  const double d1 = cross(c, d, a);
  const double d2 = cross(c, d, b);
  const double d3 = cross(a, b, c);
  const double d4 = cross(a, b, d);
  return ((d1 > 0) != (d2 > 0)) && ((d3 > 0) != (d4 > 0)) && d1 != 0 && d2 != 0 &&
         d3 != 0 && d4 != 0;
}

inline bool contains(const Rect& r, Vec2 p) {
  return p.x >= r.min.x && p.x <= r.max.x && p.y >= r.min.y && p.y <= r.max.y;
}

/// Exact distance between segment [a,b] and a rectangle (zero when they touch).
inline double distance(Vec2 a, Vec2 b, const Rect& r) {
  if (contains(r, a) || contains(r, b)) return 0.0;
  const Vec2 corners[4] = {r.min, {r.max.x, r.min.y}, r.max, {r.min.x, r.max.y}};
  for (int i = 0; i < 4; ++i) {
    if (segments_intersect(a, b, corners[i], corners[(i + 1) % 4])) return 0.0;
  }
  double best = std::min(distance(a, r), distance(b, r));
  for (const Vec2& c : corners) best = std::min(best, distance_point_segment(c, a, b));
  return best;
}

/// Minimum distance between two points moving linearly over tau in [0, duration]:
/// p(tau) = p0 + vp * tau, q(tau) = q0 + vq * tau.
inline double min_distance_linear(Vec2 p0, Vec2 vp, Vec2 q0, Vec2 vq, double duration) {
  const Vec2 d0 = p0 - q0;
  const Vec2 dv = vp - vq;
  const double vv = dot(dv, dv);
  double tau = 0.0;
  if (vv > 0.0) tau = std::clamp(-dot(d0, dv) / vv, 0.0, duration);
  return norm(d0 + dv * tau);
}

/// Wraps an angle into [-pi, pi).
inline double wrap_angle(double a) {
  double w = std::fmod(a + kPi, 2 * kPi);
  if (w < 0) w += 2 * kPi;
  return w - kPi;
}

}  // namespace maner
