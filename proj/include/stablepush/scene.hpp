#pragma once

// Physical problem description: object, parallel-jaw fingers, pushers, and
// the planner/dynamics parameters.
//
// Everything in this header is SI (m, kg, N, s, rad) except PlannerParams,
// which lives in the planner's configuration units (mm, rad). Unit conversion
// from the file format happens in scene_io.hpp only.

#include "stablepush/geometry.hpp"

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace stablepush {

class SceneError : public std::runtime_error {
 public:
  enum class Kind { Parse, Validation, Unit, Io };
  SceneError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

inline SceneError validation_error(const std::string& what) {
  return {SceneError::Kind::Validation, what};
}

enum class PatchShape { Point, Line, Circle };

struct PatchGeometry {
  PatchShape shape = PatchShape::Point;
  Vec2 a = Vec2::Zero();  // point / line start / circle center
  Vec2 b = Vec2::Zero();  // line end
  double radius = 0.0;    // circle only
};

/// How a patch is split into point contacts. Lines use `count` evenly spaced
/// points including both endpoints. Circles use a center point plus `rings`
/// concentric rings of `points_per_ring` points, ring j at radius r*j/rings.
struct Discretization {
  int count = 3;
  int rings = 1;
  int points_per_ring = 8;
};

inline int point_count(PatchShape shape, const Discretization& d) {
  switch (shape) {
    case PatchShape::Point: return 1;
    case PatchShape::Line: return d.count;
    case PatchShape::Circle: return 1 + d.rings * d.points_per_ring;
  }
  return 0;
}

/// A hard frictional point contact. The frame vectors are in (X, Y, Z) of the
/// frame the position is expressed in. Finger contacts have their normal along
/// Y (out of the grasp plane); pusher contacts have an in-plane normal.
struct PointContact {
  Vec2 position = Vec2::Zero();
  Vec3 normal = Vec3::UnitY();
  Vec3 tangent = Vec3::UnitX();
  Vec3 other = Vec3::UnitZ();
  double mu = 0.0;
  /// Normal impulse share, N*s. Fixed for fingers, zero (free) for pushers.
  double normal_impulse = 0.0;
};

struct ObjectModel {
  std::string name;
  /// Simple polygon, counterclockwise in (x, z) after validation. Object frame, m.
  std::vector<Vec2> silhouette;
  double mass = 0.0;               // kg
  double inertia = 0.0;            // kg*m^2 about Y through the COM
  bool inertia_given = false;
  Vec2 com = Vec2::Zero();         // object frame, m
  bool com_given = false;
};

struct FingerPair {
  /// Patch location in the gripper frame.
  PatchGeometry patch;
  double grip_force = 0.0;  // N, normal force per finger
  double mu = 0.0;
  Discretization discretization;
};

struct Pusher {
  std::string id;
  /// Point or line on the silhouette, object frame.
  PatchGeometry geometry;
  double mu = 0.0;
  int points = 3;
  /// Inward unit normal (the direction the pusher pushes), object frame.
  Vec2 normal = Vec2::Zero();
  bool normal_given = false;
};

/// Planner tunables, in planner units (mm, rad). Zero-valued "auto" fields are
/// resolved from the object geometry during validation.
struct PlannerParams {
  double step_translation = 1.0;              // mm
  double step_rotation = deg_to_rad(2.0);     // rad
  double rotation_weight = 0.0;               // mm per rad; auto: half bounding radius
  double goal_tolerance_translation = 1.0;    // mm, per axis
  double goal_tolerance_rotation = deg_to_rad(2.0);
  double distance_weight = 1.0;
  double switchover_weight = 0.0;             // auto: silhouette bounding-box diagonal, mm
  int switchover_threshold = 3;
  double temperature_init = 1.0;
  double temperature_rate = 2.0;              // multiplicative adaptation factor
  int n_fail_max = 10;
  double temperature_k = 1.0;                 // mm; Boltzmann-like constant
  double rewire_radius = 0.0;                 // mm; auto: 5 translation steps
  int max_iterations = 100000;
  std::uint64_t seed = 1;
  double goal_bias = 0.05;
  double sample_margin_translation = 10.0;    // mm around the init/goal box
  double sample_margin_rotation = deg_to_rad(30.0);
  double time_budget = 60.0;                  // s; 0 disables the wall-clock budget
};

struct DynamicsParams {
  double dt = 0.01;                 // s
  /// Finger point sticks when its speed is below
  /// stick_tolerance_abs + stick_tolerance_rel * characteristic speed.
  double stick_tolerance_rel = 1e-6;
  double stick_tolerance_abs = 0.0;  // m/s
  int friction_facets = 16;
  double feasibility_tol = 1e-9;
};

struct Scene {
  ObjectModel object;
  FingerPair fingers;
  std::vector<Pusher> pushers;
  Vec2 gravity{0.0, -9.81};  // m/s^2, gripper frame
  PlannerParams planner;
  DynamicsParams dynamics;

  // Derived during validation.
  double bounding_radius = 0.0;  // m, max COM-to-vertex distance
  double bounding_diagonal = 0.0;  // m, silhouette bounding-box diagonal
  /// Merged contact set for both fingers, gripper frame, doubled normal impulse.
  std::vector<PointContact> finger_contacts;
  /// Per pusher, contact points in the object frame.
  std::vector<std::vector<PointContact>> pusher_contacts;

  /// Index of a pusher by id, or -1.
  int pusher_index(const std::string& id) const {
    for (std::size_t i = 0; i < pushers.size(); ++i) {
      if (pushers[i].id == id) return static_cast<int>(i);
    }
    return -1;
  }
};

/// Splits a patch into point contacts, each carrying an equal share of
/// `total_normal_impulse`.
inline std::vector<PointContact> discretize_patch(const PatchGeometry& patch,
                                                  const Discretization& spec,
                                                  double total_normal_impulse = 0.0,
                                                  double mu = 0.0) {
  std::vector<Vec2> pts;
  switch (patch.shape) {
    case PatchShape::Point:
      pts.push_back(patch.a);
      break;
    case PatchShape::Line:
      if (spec.count == 1) {
        pts.push_back(0.5 * (patch.a + patch.b));
      } else {
        for (int i = 0; i < spec.count; ++i) {
          const double s = static_cast<double>(i) / static_cast<double>(spec.count - 1);
          pts.push_back((1.0 - s) * patch.a + s * patch.b);
        }
      }
      break;
    case PatchShape::Circle:
      pts.push_back(patch.a);
      for (int ring = 1; ring <= spec.rings; ++ring) {
        const double r = patch.radius * ring / spec.rings;
        for (int k = 0; k < spec.points_per_ring; ++k) {
          const double ang = 2.0 * kPi * k / spec.points_per_ring;
          pts.push_back(patch.a + r * Vec2(std::cos(ang), std::sin(ang)));
        }
      }
      break;
  }
  const double share = pts.empty() ? 0.0 : total_normal_impulse / static_cast<double>(pts.size());
  std::vector<PointContact> out;
  out.reserve(pts.size());
  for (const auto& p : pts) {
    PointContact c;
    c.position = p;
    c.mu = mu;
    c.normal_impulse = share;
    out.push_back(c);
  }
  return out;
}

namespace detail {

inline constexpr double kOnBoundaryTol = 1e-6;  // m

// Inward normal of the silhouette edge containing the segment [a, b]; returns
// false if no single edge contains both points.
inline bool edge_normal_for(const std::vector<Vec2>& ccw, const Vec2& a, const Vec2& b,
                            Vec2& normal, int& edges_found) {
  edges_found = 0;
  for (std::size_t i = 0, n = ccw.size(); i < n; ++i) {
    const Vec2& p = ccw[i];
    const Vec2& q = ccw[(i + 1) % n];
    if (point_segment_distance(a, p, q) <= kOnBoundaryTol &&
        point_segment_distance(b, p, q) <= kOnBoundaryTol) {
      const Vec2 d = (q - p).normalized();
      // Interior lies to the left of a counterclockwise edge.
      normal = Vec2(-d.y(), d.x());
      ++edges_found;
    }
  }
  return edges_found > 0;
}

inline void check_positive(double v, const char* what) {
  if (!(v > 0.0) || !std::isfinite(v)) throw validation_error(std::string(what) + " must be positive");
}

inline void check_nonnegative(double v, const char* what) {
  if (!(v >= 0.0) || !std::isfinite(v)) {
    throw validation_error(std::string(what) + " must be non-negative");
  }
}

}  // namespace detail

/// Checks every scene invariant and fills in derived quantities (orientation,
/// COM, inertia, pusher normals, contact discretizations, auto planner
/// parameters). Throws SceneError naming the violated invariant.
inline void validate_scene(Scene& s) {
  auto& obj = s.object;
  if (obj.silhouette.size() < 3) throw validation_error("silhouette needs at least 3 vertices");
  if (!polygon_is_simple(obj.silhouette)) throw validation_error("silhouette must be a simple polygon");
  if (signed_area(obj.silhouette) < 0.0) std::reverse(obj.silhouette.begin(), obj.silhouette.end());
  const double area = signed_area(obj.silhouette);
  if (!(area > 0.0)) throw validation_error("silhouette must have positive area");
  detail::check_positive(obj.mass, "mass");
  if (!obj.com_given) obj.com = polygon_centroid(obj.silhouette);
  {
    Vec2 lo = obj.silhouette.front(), hi = obj.silhouette.front();
    for (const auto& p : obj.silhouette) {
      lo = lo.cwiseMin(p);
      hi = hi.cwiseMax(p);
    }
    if ((obj.com.array() < lo.array()).any() || (obj.com.array() > hi.array()).any()) {
      throw validation_error("com must lie inside the silhouette bounding box");
    }
    s.bounding_diagonal = (hi - lo).norm();
  }
  if (!obj.inertia_given) {
    obj.inertia = obj.mass * polygon_polar_moment(obj.silhouette, obj.com) / area;
  }
  detail::check_positive(obj.inertia, "inertia");
  s.bounding_radius = 0.0;
  for (const auto& p : obj.silhouette) s.bounding_radius = std::max(s.bounding_radius, (p - obj.com).norm());

  auto& f = s.fingers;
  detail::check_positive(f.grip_force, "grip_force");
  detail::check_nonnegative(f.mu, "finger mu");
  if (f.patch.shape == PatchShape::Circle) detail::check_positive(f.patch.radius, "finger patch radius");
  if (f.patch.shape == PatchShape::Line && (f.patch.a - f.patch.b).norm() <= 0.0) {
    throw validation_error("finger line patch must have positive length");
  }
  if (f.discretization.count < 1 || f.discretization.rings < 1 || f.discretization.points_per_ring < 1) {
    throw validation_error("discretization point counts must be at least 1");
  }

  if (!(s.gravity.allFinite())) throw validation_error("gravity must be finite");

  auto& d = s.dynamics;
  detail::check_positive(d.dt, "dt");
  detail::check_nonnegative(d.stick_tolerance_rel, "stick_tolerance_rel");
  detail::check_nonnegative(d.stick_tolerance_abs, "stick_tolerance_abs");
  detail::check_positive(d.feasibility_tol, "feasibility_tol");
  if (d.friction_facets < 3) throw validation_error("friction_facets must be at least 3");

  if (s.pushers.empty()) throw validation_error("scene needs at least one pusher");
  for (std::size_t i = 0; i < s.pushers.size(); ++i) {
    auto& p = s.pushers[i];
    if (p.id.empty()) throw validation_error("pusher id must be non-empty");
    for (std::size_t j = 0; j < i; ++j) {
      if (s.pushers[j].id == p.id) throw validation_error("duplicate pusher id '" + p.id + "'");
    }
    detail::check_nonnegative(p.mu, ("pusher '" + p.id + "' mu").c_str());
    if (p.geometry.shape == PatchShape::Circle) {
      throw validation_error("pusher '" + p.id + "' must be a point or a line");
    }
    if (p.geometry.shape == PatchShape::Point) p.geometry.b = p.geometry.a;
    if (p.geometry.shape == PatchShape::Line && p.points < 1) {
      throw validation_error("pusher '" + p.id + "' needs at least one point");
    }
    Vec2 n;
    int edges = 0;
    if (!detail::edge_normal_for(obj.silhouette, p.geometry.a, p.geometry.b, n, edges)) {
      throw validation_error("pusher '" + p.id + "' does not lie on the silhouette boundary");
    }
    if (p.normal_given) {
      if (!(p.normal.norm() > 0.0)) throw validation_error("pusher '" + p.id + "' normal must be nonzero");
      p.normal.normalize();
    } else {
      if (edges > 1) {
        throw validation_error("pusher '" + p.id + "' sits on a silhouette vertex; give its normal explicitly");
      }
      p.normal = n;
    }
  }

  auto& pp = s.planner;
  const double bound_mm = s.bounding_radius * 1e3;
  if (pp.rotation_weight == 0.0) pp.rotation_weight = 0.5 * bound_mm;
  if (pp.switchover_weight == 0.0) pp.switchover_weight = s.bounding_diagonal * 1e3;
  if (pp.rewire_radius == 0.0) pp.rewire_radius = 5.0 * pp.step_translation;
  detail::check_positive(pp.step_translation, "planner step_translation");
  detail::check_positive(pp.step_rotation, "planner step_rotation");
  detail::check_positive(pp.rotation_weight, "planner rotation_weight");
  detail::check_positive(pp.goal_tolerance_translation, "planner goal_tolerance_translation");
  detail::check_positive(pp.goal_tolerance_rotation, "planner goal_tolerance_rotation");
  detail::check_positive(pp.distance_weight, "planner distance_weight");
  detail::check_positive(pp.switchover_weight, "planner switchover_weight");
  detail::check_positive(pp.temperature_init, "planner temperature_init");
  detail::check_positive(pp.temperature_rate, "planner temperature_rate");
  detail::check_positive(pp.temperature_k, "planner temperature_k");
  detail::check_positive(pp.rewire_radius, "planner rewire_radius");
  detail::check_positive(pp.sample_margin_translation, "planner sample_margin_translation");
  detail::check_positive(pp.sample_margin_rotation, "planner sample_margin_rotation");
  detail::check_nonnegative(pp.time_budget, "planner time_budget");
  if (pp.n_fail_max < 1) throw validation_error("planner n_fail_max must be positive");
  if (pp.max_iterations < 1) throw validation_error("planner max_iterations must be positive");
  if (pp.switchover_threshold < 0) throw validation_error("planner switchover_threshold must be non-negative");
  if (!(pp.goal_bias >= 0.0 && pp.goal_bias <= 1.0)) throw validation_error("planner goal_bias must lie in [0, 1]");
  if (pp.goal_tolerance_translation > pp.step_translation ||
      pp.goal_tolerance_rotation > pp.step_rotation) {
    throw validation_error("planner goal tolerance must not exceed the step size on any axis");
  }

  // Derived contact sets.
  s.finger_contacts = discretize_patch(f.patch, f.discretization, 2.0 * f.grip_force * d.dt, f.mu);
  s.pusher_contacts.clear();
  for (const auto& p : s.pushers) {
    Discretization disc;
    disc.count = p.points;
    auto pts = discretize_patch(p.geometry, disc, 0.0, p.mu);
    const Vec2 t2 = Vec2(p.normal.y(), -p.normal.x());
    for (auto& c : pts) {
      c.normal = Vec3(p.normal.x(), 0.0, p.normal.y());
      c.tangent = Vec3(t2.x(), 0.0, t2.y());
      c.other = Vec3::UnitY();
    }
    s.pusher_contacts.push_back(std::move(pts));
  }
}

}  // namespace stablepush
