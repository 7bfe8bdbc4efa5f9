#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <numbers>

namespace crashnav::world {

using Vec2 = Eigen::Vector2d;

/// Wraps an angle into [-pi, pi).
inline double wrap_angle(double a) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  double w = std::fmod(a + std::numbers::pi, two_pi);
  if (w < 0.0) w += two_pi;
  w -= std::numbers::pi;
  // fmod can land exactly on +pi after the shift for inputs like -pi - tiny.
  if (w >= std::numbers::pi) w -= two_pi;
  return w;
}

struct Pose {
  double x = 0.0;
  double y = 0.0;
  double heading = 0.0;

  Pose() = default;
  Pose(double x_, double y_, double heading_) : x(x_), y(y_), heading(wrap_angle(heading_)) {}

  Vec2 position() const { return {x, y}; }
  Vec2 forward() const { return {std::cos(heading), std::sin(heading)}; }

  friend bool operator==(const Pose&, const Pose&) = default;
};

inline Vec2 direction(double angle) { return {std::cos(angle), std::sin(angle)}; }

/// z-component of the 2D cross product.
template <typename DerivedA, typename DerivedB>
inline double cross(const Eigen::MatrixBase<DerivedA>& a, const Eigen::MatrixBase<DerivedB>& b) {
  return a.x() * b.y() - a.y() * b.x();
}

/// Closest point on segment [a, b] to p.
inline Vec2 closest_point_on_segment(const Vec2& p, const Vec2& a, const Vec2& b) {
  const Vec2 ab = b - a;
  const double len2 = ab.squaredNorm();
  if (len2 == 0.0) return a;
  const double t = std::clamp((p - a).dot(ab) / len2, 0.0, 1.0);
  return a + t * ab;
}

inline double point_segment_distance(const Vec2& p, const Vec2& a, const Vec2& b) {
  return (p - closest_point_on_segment(p, a, b)).norm();
}

/// True when closed segments [p1,p2] and [q1,q2] share a point.
inline bool segments_intersect(const Vec2& p1, const Vec2& p2, const Vec2& q1, const Vec2& q2) {
  const double d1 = cross(p2 - p1, q1 - p1);
  const double d2 = cross(p2 - p1, q2 - p1);
  const double d3 = cross(q2 - q1, p1 - q1);
  const double d4 = cross(q2 - q1, p2 - q1);
  if (((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) && ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0)))
    return true;
  auto on_segment = [](const Vec2& a, const Vec2& b, const Vec2& c) {
    return std::min(a.x(), b.x()) <= c.x() && c.x() <= std::max(a.x(), b.x()) &&
           std::min(a.y(), b.y()) <= c.y() && c.y() <= std::max(a.y(), b.y());
  };
  if (d1 == 0 && on_segment(p1, p2, q1)) return true;
  if (d2 == 0 && on_segment(p1, p2, q2)) return true;
  if (d3 == 0 && on_segment(q1, q2, p1)) return true;
  if (d4 == 0 && on_segment(q1, q2, p2)) return true;
  return false;
}

inline double segment_segment_distance(const Vec2& p1, const Vec2& p2, const Vec2& q1, const Vec2& q2) {
  if (segments_intersect(p1, p2, q1, q2)) return 0.0;
  return std::min({point_segment_distance(p1, q1, q2), point_segment_distance(p2, q1, q2),
                   point_segment_distance(q1, p1, p2), point_segment_distance(q2, p1, p2)});
}

}  // namespace crashnav::world
