#pragma once

// Planar geometry in the grasp (XZ) plane.
//
// Points are Eigen::Vector2d holding (x, z). Rotations are right-handed about
// +Y, so with X drawn to the right and Z drawn up a positive angle turns the
// object clockwise. The same convention fixes the sign of torque about Y:
// tau_y = r_z * f_x - r_x * f_z.

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <span>
#include <vector>

namespace stablepush {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;

inline constexpr double kPi = std::numbers::pi;

/// Wraps an angle to (-pi, pi].
inline double wrap_angle(double a) {
  a = std::remainder(a, 2.0 * kPi);
  if (a <= -kPi) a += 2.0 * kPi;
  return a;
}

inline double deg_to_rad(double d) { return d * kPi / 180.0; }
inline double rad_to_deg(double r) { return r * 180.0 / kPi; }

/// Rotation about +Y applied to an in-plane vector.
inline Vec2 rotate(const Vec2& v, double theta) {
  const double c = std::cos(theta), s = std::sin(theta);
  return {c * v.x() + s * v.y(), -s * v.x() + c * v.y()};
}

/// Inverse of rotate().
inline Vec2 unrotate(const Vec2& v, double theta) { return rotate(v, -theta); }

/// In-plane velocity of a point at offset r for angular rate omega about +Y.
inline Vec2 angular_velocity_cross(double omega, const Vec2& r) {
  return {omega * r.y(), -omega * r.x()};
}

/// Torque about +Y of force f applied at offset r.
inline double torque_y(const Vec2& r, const Vec2& f) {
  return r.y() * f.x() - r.x() * f.y();
}

inline double cross2(const Vec2& a, const Vec2& b) {
  return a.x() * b.y() - a.y() * b.x();
}

/// Signed area, positive when the vertex order is counterclockwise in the
/// (x, z) coordinate plane.
inline double signed_area(std::span<const Vec2> poly) {
  double a = 0.0;
  for (std::size_t i = 0, n = poly.size(); i < n; ++i) {
    a += cross2(poly[i], poly[(i + 1) % n]);
  }
  return 0.5 * a;
}

inline Vec2 polygon_centroid(std::span<const Vec2> poly) {
  const double area = signed_area(poly);
  Vec2 c = Vec2::Zero();
  for (std::size_t i = 0, n = poly.size(); i < n; ++i) {
    const Vec2& p = poly[i];
    const Vec2& q = poly[(i + 1) % n];
    c += (p + q) * cross2(p, q);
  }
  return c / (6.0 * area);
}

/// Polar second moment of area about `about`, i.e. integral of |x - about|^2
/// over the polygon. Sign follows the vertex order.
inline double polygon_polar_moment(std::span<const Vec2> poly, const Vec2& about) {
  double j = 0.0;
  for (std::size_t i = 0, n = poly.size(); i < n; ++i) {
    const Vec2 p = poly[i] - about;
    const Vec2 q = poly[(i + 1) % n] - about;
    const double c = cross2(p, q);
    j += c * (p.squaredNorm() + p.dot(q) + q.squaredNorm());
  }
  return j / 12.0;
}

inline double point_segment_distance(const Vec2& p, const Vec2& a, const Vec2& b) {
  const Vec2 ab = b - a;
  const double len2 = ab.squaredNorm();
  double t = len2 > 0.0 ? (p - a).dot(ab) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return (a + t * ab - p).norm();
}

inline double distance_to_boundary(std::span<const Vec2> poly, const Vec2& p) {
  double d = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0, n = poly.size(); i < n; ++i) {
    d = std::min(d, point_segment_distance(p, poly[i], poly[(i + 1) % n]));
  }
  return d;
}

/// Crossing-number test; boundary points are reported inside when they are
/// within `boundary_tol` of an edge.
inline bool point_in_polygon(std::span<const Vec2> poly, const Vec2& p,
                             double boundary_tol = 0.0) {
  if (boundary_tol > 0.0 && distance_to_boundary(poly, p) <= boundary_tol) return true;
  bool inside = false;
  for (std::size_t i = 0, n = poly.size(), j = n - 1; i < n; j = i++) {
    const Vec2& a = poly[i];
    const Vec2& b = poly[j];
    if ((a.y() > p.y()) != (b.y() > p.y())) {
      const double x = (b.x() - a.x()) * (p.y() - a.y()) / (b.y() - a.y()) + a.x();
      if (p.x() < x) inside = !inside;
    }
  }
  return inside;
}

namespace detail {

inline int orientation(const Vec2& a, const Vec2& b, const Vec2& c, double eps) {
  const double v = cross2(b - a, c - a);
  if (v > eps) return 1;
  if (v < -eps) return -1;
  return 0;
}

inline bool on_segment(const Vec2& a, const Vec2& b, const Vec2& p, double eps) {
  return p.x() <= std::max(a.x(), b.x()) + eps && p.x() >= std::min(a.x(), b.x()) - eps &&
         p.y() <= std::max(a.y(), b.y()) + eps && p.y() >= std::min(a.y(), b.y()) - eps;
}

inline bool segments_intersect(const Vec2& p1, const Vec2& p2, const Vec2& q1,
                               const Vec2& q2, double eps) {
  const int o1 = orientation(p1, p2, q1, eps);
  const int o2 = orientation(p1, p2, q2, eps);
  const int o3 = orientation(q1, q2, p1, eps);
  const int o4 = orientation(q1, q2, p2, eps);
  if (o1 != o2 && o3 != o4) return true;
  if (o1 == 0 && on_segment(p1, p2, q1, eps)) return true;
  if (o2 == 0 && on_segment(p1, p2, q2, eps)) return true;
  if (o3 == 0 && on_segment(q1, q2, p1, eps)) return true;
  if (o4 == 0 && on_segment(q1, q2, p2, eps)) return true;
  return false;
}

}  // namespace detail

/// True when no two non-adjacent edges touch and no vertex repeats.
inline bool polygon_is_simple(std::span<const Vec2> poly) {
  const std::size_t n = poly.size();
  if (n < 3) return false;
  double scale = 0.0;
  for (const auto& p : poly) scale = std::max(scale, p.cwiseAbs().maxCoeff());
  const double eps = 1e-12 * std::max(1.0, scale * scale);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if ((poly[i] - poly[j]).norm() <= 1e-12 * std::max(1.0, scale)) return false;
      const bool adjacent = (j == i + 1) || (i == 0 && j == n - 1);
      if (adjacent) continue;
      if (detail::segments_intersect(poly[i], poly[(i + 1) % n], poly[j], poly[(j + 1) % n],
                                     eps)) {
        return false;
      }
    }
  }
  return true;
}

}  // namespace stablepush
