#pragma once

// Stable-push feasibility: for a candidate object motion in the grasp, decide
// whether a pusher that sticks to the object can supply the wrench that the
// motion requires.
//
// Frames: the gripper frame is fixed; the object pose (x, z, theta) places the
// object frame in it. All wrenches are expressed in the object frame about the
// center of mass, in SI impulse units (N*s, N*s, N*m*s). Cones handed to the
// geometry routines use the scaled coordinates (f_x, f_z, tau_y / L) with L
// the object's bounding radius, so that force and torque are comparable.

#include "stablepush/cone.hpp"
#include "stablepush/scene.hpp"

#include <Eigen/Core>

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace stablepush {

/// Object pose in the gripper frame: x, z in mm, theta in rad.
struct GraspPose {
  double x = 0.0;
  double z = 0.0;
  double theta = 0.0;

  Vec2 position_m() const { return Vec2(x, z) * 1e-3; }
  bool operator==(const GraspPose&) const = default;
};

/// Object velocity for one quasi-dynamic step: velocity of the object-frame
/// origin in the gripper frame (m/s) and angular rate about +Y (rad/s).
struct ObjectTwist {
  double vx = 0.0;
  double vz = 0.0;
  double omega = 0.0;

  bool is_zero() const { return vx == 0.0 && vz == 0.0 && omega == 0.0; }
};

/// Twist that carries `from` to `to` in one step of length dt.
inline ObjectTwist step_twist(const GraspPose& from, const GraspPose& to, double dt) {
  return {(to.x - from.x) * 1e-3 / dt, (to.z - from.z) * 1e-3 / dt,
          wrap_angle(to.theta - from.theta) / dt};
}

class UnknownPusher : public std::invalid_argument {
 public:
  explicit UnknownPusher(const std::string& id) : std::invalid_argument("unknown pusher '" + id + "'") {}
};

struct FingerPointMode {
  bool sticking = false;
  /// Unit sliding direction of the object relative to the finger, object frame.
  Vec2 slide_dir = Vec2::Zero();
};

using ContactMode = std::vector<FingerPointMode>;

using GraspMap = Eigen::Matrix3d;

/// Maps a local contact impulse (n, t, o) to the planar wrench about `com`.
/// Out-of-plane components are dropped; for fingers they cancel across the
/// two jaws.
inline GraspMap grasp_map(const PointContact& c, const Vec2& com) {
  const Vec2 r = c.position - com;
  GraspMap g;
  const Vec3 cols[3] = {c.normal, c.tangent, c.other};
  for (int k = 0; k < 3; ++k) {
    const Vec2 f(cols[k].x(), cols[k].z());
    g(0, k) = f.x();
    g(1, k) = f.y();
    g(2, k) = torque_y(r, f);
  }
  return g;
}

/// Planar wrench of an in-plane force applied at r (relative to the COM).
inline Wrench planar_wrench(const Vec2& r, const Vec2& f) { return {f.x(), f.y(), torque_y(r, f)}; }

/// Finger contact points expressed in the object frame at `pose`. Tangent and
/// other directions are the object-frame X and Z axes.
inline std::vector<PointContact> finger_contacts_in_object(const Scene& s, const GraspPose& pose) {
  std::vector<PointContact> out = s.finger_contacts;
  const Vec2 t = pose.position_m();
  for (auto& c : out) c.position = unrotate(c.position - t, pose.theta);
  return out;
}

/// True when every finger contact point lies on the object at `pose`.
inline bool grasp_maintained(const Scene& s, const GraspPose& pose) {
  const Vec2 t = pose.position_m();
  for (const auto& c : s.finger_contacts) {
    const Vec2 p = unrotate(c.position - t, pose.theta);
    if (!point_in_polygon(s.object.silhouette, p, 1e-9)) return false;
  }
  return true;
}

/// Velocity of the object's center of mass, object frame.
inline Vec2 com_velocity_object(const Scene& s, const GraspPose& pose, const ObjectTwist& tw) {
  const Vec2 com_g = rotate(s.object.com, pose.theta);
  const Vec2 v = Vec2(tw.vx, tw.vz) + angular_velocity_cross(tw.omega, com_g);
  return unrotate(v, pose.theta);
}

/// Classifies each finger point as sticking (the object point under it does
/// not move) or sliding, with the sliding direction.
inline ContactMode classify_modes(const Scene& s, const GraspPose& pose, const ObjectTwist& tw) {
  if (tw.is_zero()) throw std::invalid_argument("twist must be nonzero");
  const Vec2 t = pose.position_m();
  const Vec2 v0(tw.vx, tw.vz);
  const double char_speed =
      com_velocity_object(s, pose, tw).norm() + std::abs(tw.omega) * s.bounding_radius;
  const double eps = s.dynamics.stick_tolerance_abs + s.dynamics.stick_tolerance_rel * char_speed;
  ContactMode modes(s.finger_contacts.size());
  for (std::size_t i = 0; i < s.finger_contacts.size(); ++i) {
    const Vec2 v = v0 + angular_velocity_cross(tw.omega, s.finger_contacts[i].position - t);
    const double speed = v.norm();
    if (speed < eps || speed == 0.0) {
      modes[i].sticking = true;
    } else {
      modes[i].slide_dir = unrotate(v / speed, pose.theta);
    }
  }
  return modes;
}

/// Maximum-dissipation friction impulse of a sliding finger point: magnitude
/// mu * p_n, opposing the slip direction.
inline Vec2 sliding_friction_impulse(const PointContact& c, const Vec2& slide_dir) {
  return -c.mu * c.normal_impulse * slide_dir;
}

/// Gravity impulse m g dt, object frame.
inline Wrench gravity_impulse(const Scene& s, const GraspPose& pose) {
  const Vec2 g = unrotate(s.gravity, pose.theta) * s.object.mass * s.dynamics.dt;
  return {g.x(), g.y(), 0.0};
}

/// Momentum gained from rest over one step (m v_com, I omega), object frame.
inline Wrench step_momentum(const Scene& s, const GraspPose& pose, const ObjectTwist& tw) {
  const Vec2 p = com_velocity_object(s, pose, tw) * s.object.mass;
  return {p.x(), p.y(), s.object.inertia * tw.omega};
}

/// Sum of the sliding finger friction impulses as a wrench.
inline Wrench sliding_finger_wrench(const Scene& s, const GraspPose& pose, const ContactMode& modes) {
  const auto contacts = finger_contacts_in_object(s, pose);
  Wrench w = Wrench::Zero();
  for (std::size_t i = 0; i < contacts.size(); ++i) {
    if (modes[i].sticking) continue;
    w += planar_wrench(contacts[i].position - s.object.com,
                       sliding_friction_impulse(contacts[i], modes[i].slide_dir));
  }
  return w;
}

/// Wrench the pusher must supply: -(sliding friction + gravity - momentum).
inline Wrench motion_wrench(const Scene& s, const GraspPose& pose, const ObjectTwist& tw,
                            const ContactMode& modes) {
  return -(sliding_finger_wrench(s, pose, modes) + gravity_impulse(s, pose) - step_momentum(s, pose, tw));
}

/// Which pusher point and tangential sign a cone generator came from.
struct GeneratorSource {
  int point = 0;
  int tangent_sign = 0;  // +1, -1, or 0 when mu == 0
};

/// Generalized friction cone of a pusher in physical units, with the source of
/// every generator. Each point contributes the edges n +/- mu t of its planar
/// friction cone (one ray when mu == 0).
inline WrenchCone pusher_generalized_cone(const Scene& s, std::size_t pusher,
                                          std::vector<GeneratorSource>* sources = nullptr) {
  std::vector<WrenchCone> parts;
  const auto& pts = s.pusher_contacts.at(pusher);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const GraspMap g = grasp_map(pts[i], s.object.com);
    WrenchCone c;
    const double mu = pts[i].mu;
    if (mu == 0.0) {
      c.generators.push_back(g * Vec3(1.0, 0.0, 0.0));
      if (sources) sources->push_back({static_cast<int>(i), 0});
    } else {
      c.generators.push_back(g * Vec3(1.0, mu, 0.0));
      c.generators.push_back(g * Vec3(1.0, -mu, 0.0));
      if (sources) {
        sources->push_back({static_cast<int>(i), 1});
        sources->push_back({static_cast<int>(i), -1});
      }
    }
    parts.push_back(std::move(c));
  }
  return conical_sum(parts);
}

/// Scaled coordinates (f_x, f_z, tau / L).
inline Wrench scale_wrench(const Wrench& w, double length) { return {w.x(), w.y(), w.z() / length}; }
inline Wrench unscale_wrench(const Wrench& w, double length) { return {w.x(), w.y(), w.z() * length}; }

/// Friction set of the sticking finger points: the Minkowski sum over points
/// of an inscribed `facets`-gon of the friction disc of radius mu * p_n,
/// mapped to wrenches. `impulses[v][i]` is the in-plane impulse of sticking
/// point i that produces vertex v. Vertices are stored negated (the set the
/// pusher sees on the other side of the balance).
struct StickingPolytope {
  WrenchPolytope polytope;
  std::vector<std::vector<Vec2>> impulses;
};

inline StickingPolytope sticking_finger_polytope(const Scene& s, std::span<const PointContact> sticking,
                                                 int facets = 16) {
  StickingPolytope out;
  out.polytope.vertices.push_back(Wrench::Zero());
  out.impulses.push_back({});
  for (const auto& c : sticking) {
    const double rho = c.mu * c.normal_impulse;
    std::vector<Vec2> disc;
    if (rho == 0.0) {
      disc.push_back(Vec2::Zero());
    } else {
      for (int k = 0; k < facets; ++k) {
        const double a = 2.0 * kPi * k / facets;
        disc.push_back(rho * Vec2(std::cos(a), std::sin(a)));
      }
    }
    StickingPolytope next;
    const Vec2 r = c.position - s.object.com;
    for (std::size_t v = 0; v < out.polytope.vertices.size(); ++v) {
      for (const auto& d : disc) {
        next.polytope.vertices.push_back(out.polytope.vertices[v] - planar_wrench(r, d));
        auto parts = out.impulses[v];
        parts.push_back(d);
        next.impulses.push_back(std::move(parts));
      }
    }
    // Keep only extreme points once the vertex count grows.
    if (next.polytope.vertices.size() > 64) {
      StickingPolytope pruned;
      std::vector<bool> keep(next.polytope.vertices.size(), true);
      for (std::size_t v = 0; v < next.polytope.vertices.size(); ++v) {
        std::vector<Vec3> others;
        for (std::size_t u = 0; u < next.polytope.vertices.size(); ++u) {
          if (u != v && keep[u]) others.push_back(next.polytope.vertices[u]);
        }
        if (in_convex_hull(next.polytope.vertices[v], others, 1e-12)) keep[v] = false;
      }
      for (std::size_t v = 0; v < keep.size(); ++v) {
        if (!keep[v]) continue;
        pruned.polytope.vertices.push_back(next.polytope.vertices[v]);
        pruned.impulses.push_back(next.impulses[v]);
      }
      next = std::move(pruned);
    }
    out = std::move(next);
  }
  // Collapse exact duplicates (e.g. zero-radius discs).
  StickingPolytope dedup;
  for (std::size_t v = 0; v < out.polytope.vertices.size(); ++v) {
    bool dup = false;
    for (const auto& u : dedup.polytope.vertices) {
      if ((u - out.polytope.vertices[v]).norm() == 0.0) {
        dup = true;
        break;
      }
    }
    if (!dup) {
      dedup.polytope.vertices.push_back(out.polytope.vertices[v]);
      dedup.impulses.push_back(out.impulses[v]);
    }
  }
  return dedup;
}

enum class PushCase { AllSlide, StickSlide };

inline const char* to_string(PushCase c) { return c == PushCase::AllSlide ? "AllSlide" : "StickSlide"; }

struct FeasibilityCertificate {
  bool feasible = false;
  PushCase push_case = PushCase::AllSlide;
  int pusher = -1;
  /// Wrench the motion requires (sliding terms only).
  Wrench motion_wrench = Wrench::Zero();
  /// Pusher wrench reconstructed from the witness impulses.
  Wrench witness = Wrench::Zero();
  /// Relative-interior margin of the decision (>= feasibility_tol when feasible).
  double margin = 0.0;
  /// Normalized Newton-Euler residual of the witness.
  double residual = 0.0;
  /// Per pusher point: (normal, tangential) impulse, N*s.
  std::vector<Vec2> pusher_impulses;
  /// Finger point indices that stick, and their in-plane friction impulse
  /// (object frame, N*s) in the witness.
  std::vector<int> sticking_points;
  std::vector<Vec2> sticking_impulses;
};

/// Immutable, per-scene cache of pusher cones. Safe to share across threads.
class PushModel {
 public:
  explicit PushModel(const Scene& scene) : scene_(&scene) {
    const double L = scene.bounding_radius;
    for (std::size_t p = 0; p < scene.pushers.size(); ++p) {
      PusherCache pc;
      pc.physical = pusher_generalized_cone(scene, p, &pc.sources);
      WrenchCone scaled;
      for (const auto& g : pc.physical.generators) scaled.generators.push_back(scale_wrench(g, L));
      pc.scaled = with_face_normals(std::move(scaled));
      pushers_.push_back(std::move(pc));
    }
  }

  const Scene& scene() const { return *scene_; }
  double length_scale() const { return scene_->bounding_radius; }

  int pusher_index(const std::string& id) const {
    const int i = scene_->pusher_index(id);
    if (i < 0) throw UnknownPusher(id);
    return i;
  }

  const WrenchCone& physical_cone(int pusher) const { return pushers_.at(static_cast<std::size_t>(pusher)).physical; }
  const WrenchCone& scaled_cone(int pusher) const { return pushers_.at(static_cast<std::size_t>(pusher)).scaled; }
  const std::vector<GeneratorSource>& sources(int pusher) const {
    return pushers_.at(static_cast<std::size_t>(pusher)).sources;
  }

 private:
  struct PusherCache {
    WrenchCone physical;
    WrenchCone scaled;
    std::vector<GeneratorSource> sources;
  };
  const Scene* scene_;
  std::vector<PusherCache> pushers_;
};

/// Newton-Euler residual of a certificate's witness, recomputed from the
/// contact impulses:
///   sum_sliding G p + G_stick p_stick + G_pusher p_pusher + P_mg - M v
/// scaled to (f, tau / L) and divided by the largest term.
inline double newton_euler_residual(const PushModel& model, const GraspPose& pose, const ObjectTwist& tw,
                                    const FeasibilityCertificate& cert, bool include_sticking = true) {
  const Scene& s = model.scene();
  const double L = model.length_scale();
  const auto modes = classify_modes(s, pose, tw);
  const auto fingers = finger_contacts_in_object(s, pose);

  Wrench sliding = Wrench::Zero();
  for (std::size_t i = 0; i < fingers.size(); ++i) {
    if (modes[i].sticking) continue;
    sliding += planar_wrench(fingers[i].position - s.object.com,
                             sliding_friction_impulse(fingers[i], modes[i].slide_dir));
  }
  Wrench sticking = Wrench::Zero();
  if (include_sticking) {
    for (std::size_t k = 0; k < cert.sticking_points.size(); ++k) {
      const auto& c = fingers.at(static_cast<std::size_t>(cert.sticking_points[k]));
      sticking += planar_wrench(c.position - s.object.com, cert.sticking_impulses[k]);
    }
  }
  Wrench pusher = Wrench::Zero();
  const auto& pts = s.pusher_contacts.at(static_cast<std::size_t>(cert.pusher));
  for (std::size_t i = 0; i < pts.size() && i < cert.pusher_impulses.size(); ++i) {
    pusher += grasp_map(pts[i], s.object.com) *
              Vec3(cert.pusher_impulses[i].x(), cert.pusher_impulses[i].y(), 0.0);
  }
  const Wrench grav = gravity_impulse(s, pose);
  const Wrench mom = step_momentum(s, pose, tw);
  const Wrench r = sliding + sticking + pusher + grav - mom;
  double scale = 1e-300;
  for (const Wrench& w : {sliding, sticking, pusher, grav, mom}) scale = std::max(scale, scale_wrench(w, L).norm());
  return scale_wrench(r, L).norm() / scale;
}

struct CheckOptions {
  /// AllSlide ignores sticking finger points entirely. StickSlide always takes
  /// the polytope intersection path, even with no sticking points. Unset picks
  /// the case from the contact modes.
  std::optional<PushCase> force_case;
};

namespace detail {

inline void fill_pusher_impulses(const PushModel& model, int pusher, const Eigen::VectorXd& coeffs,
                                 FeasibilityCertificate& cert) {
  const Scene& s = model.scene();
  const auto& pts = s.pusher_contacts.at(static_cast<std::size_t>(pusher));
  const auto& src = model.sources(pusher);
  cert.pusher_impulses.assign(pts.size(), Vec2::Zero());
  for (Eigen::Index j = 0; j < coeffs.size(); ++j) {
    const auto& g = src[static_cast<std::size_t>(j)];
    const double a = coeffs(j);
    auto& imp = cert.pusher_impulses[static_cast<std::size_t>(g.point)];
    imp.x() += a;
    imp.y() += a * g.tangent_sign * pts[static_cast<std::size_t>(g.point)].mu;
  }
  cert.witness = Wrench::Zero();
  for (std::size_t i = 0; i < pts.size(); ++i) {
    cert.witness += grasp_map(pts[i], s.object.com) *
                    Vec3(cert.pusher_impulses[i].x(), cert.pusher_impulses[i].y(), 0.0);
  }
}

// Relative-interior test of a single scaled wrench against a pusher cone.
inline void decide_membership(const PushModel& model, int pusher, const Wrench& scaled_w, double tol,
                              FeasibilityCertificate& cert) {
  const WrenchCone& cone = model.scaled_cone(pusher);
  if (cone.face_normals) {
    cert.margin = scaled_w.norm() > 0.0 ? -max_facet_projection(*cone.face_normals, scaled_w) : 0.0;
    cert.feasible = cert.margin >= tol;
    if (cert.feasible) {
      const auto q = cone_membership_lp(cone, scaled_w, tol);
      fill_pusher_impulses(model, pusher, q.coefficients, cert);
    }
  } else {
    const auto q = cone_membership_lp(cone, scaled_w, tol);
    cert.margin = q.feasible ? q.margin : 0.0;
    cert.feasible = q.feasible && q.margin >= tol;
    if (cert.feasible) fill_pusher_impulses(model, pusher, q.coefficients, cert);
  }
}

}  // namespace detail

/// Decides whether moving the object with `tw` from `pose` is a stable push
/// for the given pusher. Feasibility requires the pusher wrench to lie in the
/// relative interior of its cone (every pusher point strictly inside its
/// friction cone) by at least the scene's feasibility tolerance.
inline FeasibilityCertificate check_stable_push(const PushModel& model, const GraspPose& pose,
                                                const ObjectTwist& tw, int pusher,
                                                const CheckOptions& opt = {}) {
  const Scene& s = model.scene();
  if (pusher < 0 || static_cast<std::size_t>(pusher) >= s.pushers.size()) {
    throw UnknownPusher(std::to_string(pusher));
  }
  const double L = model.length_scale();
  const double tol = s.dynamics.feasibility_tol;
  FeasibilityCertificate cert;
  cert.pusher = pusher;
  const auto modes = classify_modes(s, pose, tw);
  cert.motion_wrench = motion_wrench(s, pose, tw, modes);
  const Wrench wm = scale_wrench(cert.motion_wrench, L);

  const bool all_slide_only = opt.force_case == PushCase::AllSlide;
  std::vector<PointContact> sticking;
  if (!all_slide_only) {
    const auto fingers = finger_contacts_in_object(s, pose);
    for (std::size_t i = 0; i < modes.size(); ++i) {
      if (!modes[i].sticking) continue;
      cert.sticking_points.push_back(static_cast<int>(i));
      sticking.push_back(fingers[i]);
    }
  }

  if (sticking.empty() && opt.force_case != PushCase::StickSlide) {
    cert.push_case = PushCase::AllSlide;
    detail::decide_membership(model, pusher, wm, tol, cert);
  } else {
    cert.push_case = PushCase::StickSlide;
    const auto stick = sticking_finger_polytope(s, sticking, s.dynamics.friction_facets);
    WrenchPolytope scaled;
    for (const auto& v : stick.polytope.vertices) scaled.vertices.push_back(scale_wrench(v, L));
    const auto shifted = minkowski_sum_point_polytope(wm, scaled);
    if (shifted.vertices.size() == 1 && !opt.force_case) {
      detail::decide_membership(model, pusher, shifted.vertices.front(), tol, cert);
      cert.sticking_impulses = stick.impulses.front();
    } else {
      const auto q = polytope_cone_intersection_lp(shifted, model.scaled_cone(pusher), tol);
      cert.margin = q.feasible ? q.margin : 0.0;
      cert.feasible = q.feasible && q.margin >= tol;
      if (cert.feasible) {
        detail::fill_pusher_impulses(model, pusher, q.coefficients, cert);
        cert.sticking_impulses.assign(sticking.size(), Vec2::Zero());
        for (Eigen::Index v = 0; v < q.vertex_weights.size(); ++v) {
          const double lam = q.vertex_weights(v);
          if (lam == 0.0) continue;
          for (std::size_t k = 0; k < sticking.size(); ++k) {
            cert.sticking_impulses[k] += lam * stick.impulses[static_cast<std::size_t>(v)][k];
          }
        }
      }
    }
  }
  if (!cert.feasible) {
    cert.pusher_impulses.clear();
    cert.sticking_impulses.clear();
    cert.witness = Wrench::Zero();
  } else {
    if (cert.sticking_impulses.size() != cert.sticking_points.size()) {
      cert.sticking_impulses.assign(cert.sticking_points.size(), Vec2::Zero());
    }
    cert.residual = newton_euler_residual(model, pose, tw, cert, !all_slide_only);
  }
  return cert;
}

inline FeasibilityCertificate check_stable_push(const PushModel& model, const GraspPose& pose,
                                                const ObjectTwist& tw, const std::string& pusher_id,
                                                const CheckOptions& opt = {}) {
  return check_stable_push(model, pose, tw, model.pusher_index(pusher_id), opt);
}

}  // namespace stablepush
