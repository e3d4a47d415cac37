#pragma once

// Polyhedral convex sets in the 3-D planar wrench space (f_x, f_z, tau_y).
//
// Cones are stored by generators; face normals are an optional cache that is
// only valid for full-dimensional cones. Everything here is unit-agnostic:
// callers that mix forces and torques should pass coordinates that are already
// scaled to be comparable.

#include "stablepush/geometry.hpp"
#include "stablepush/lp.hpp"

#include <Eigen/Core>
#include <Eigen/Geometry>
#include <Eigen/SVD>

#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

namespace stablepush {

using Wrench = Vec3;

/// Default membership tolerance on unit-scaled wrenches.
inline constexpr double kConeTolerance = 1e-9;

struct WrenchCone {
  std::vector<Wrench> generators;
  /// Outward facet normals (unit length). w is in the cone iff n.w <= 0 for all
  /// of them. Present only for full-dimensional cones.
  std::optional<std::vector<Vec3>> face_normals;
};

struct WrenchPolytope {
  std::vector<Wrench> vertices;
};

class DegenerateCone : public std::runtime_error {
 public:
  explicit DegenerateCone(int rank)
      : std::runtime_error("cone generators span rank " + std::to_string(rank) + " < 3"),
        rank_(rank) {}
  int rank() const { return rank_; }

 private:
  int rank_;
};

namespace detail {

inline constexpr double kZeroNorm = 1e-300;

inline std::vector<Vec3> unit_generators(std::span<const Wrench> gens) {
  std::vector<Vec3> out;
  out.reserve(gens.size());
  for (const auto& g : gens) {
    const double n = g.norm();
    if (n > kZeroNorm) out.push_back(g / n);
  }
  return out;
}

inline Eigen::MatrixXd as_columns(std::span<const Vec3> v) {
  Eigen::MatrixXd m(3, static_cast<Eigen::Index>(v.size()));
  for (std::size_t j = 0; j < v.size(); ++j) m.col(static_cast<Eigen::Index>(j)) = v[j];
  return m;
}

}  // namespace detail

/// Dimension of the linear span of the generators.
inline int cone_rank(const WrenchCone& cone) {
  const auto unit = detail::unit_generators(cone.generators);
  if (unit.empty()) return 0;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(detail::as_columns(unit));
  const auto& s = svd.singularValues();
  int r = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (s(i) > 1e-9 * s(0)) ++r;
  }
  return r;
}

/// Conical hull of the union of all generator sets.
inline WrenchCone conical_sum(std::span<const WrenchCone> cones) {
  WrenchCone out;
  for (const auto& c : cones) {
    out.generators.insert(out.generators.end(), c.generators.begin(), c.generators.end());
  }
  return out;
}

/// Outward unit normals of the facets of a full-dimensional cone. Throws
/// DegenerateCone when the generators do not span 3-D. A cone equal to the
/// whole space has no facets and yields an empty list.
inline std::vector<Vec3> face_normals(const WrenchCone& cone) {
  const int rank = cone_rank(cone);
  if (rank < 3) throw DegenerateCone(rank);
  const auto g = detail::unit_generators(cone.generators);
  constexpr double kSideTol = 1e-10;
  std::vector<Vec3> normals;
  for (std::size_t i = 0; i < g.size(); ++i) {
    for (std::size_t j = i + 1; j < g.size(); ++j) {
      Vec3 n = g[i].cross(g[j]);
      const double len = n.norm();
      if (len < 1e-9) continue;
      n /= len;
      bool all_neg = true, all_pos = true;
      for (const auto& gk : g) {
        const double d = n.dot(gk);
        if (d > kSideTol) all_neg = false;
        if (d < -kSideTol) all_pos = false;
      }
      if (!all_neg && !all_pos) continue;
      if (!all_neg) n = -n;
      const bool dup = std::any_of(normals.begin(), normals.end(),
                                   [&](const Vec3& m) { return (m - n).norm() < 1e-9; });
      if (!dup) normals.push_back(n);
    }
  }
  return normals;
}

/// Returns the cone with its facet cache populated when it is full-dimensional.
inline WrenchCone with_face_normals(WrenchCone cone) {
  if (cone_rank(cone) == 3) {
    cone.face_normals = face_normals(cone);
  } else {
    cone.face_normals.reset();
  }
  return cone;
}

/// Largest facet projection of the unit-scaled wrench; <= 0 means inside.
inline double max_facet_projection(std::span<const Vec3> normals, const Wrench& w) {
  const double n = w.norm();
  if (n <= detail::kZeroNorm) return 0.0;
  const Vec3 u = w / n;
  double worst = -std::numeric_limits<double>::infinity();
  for (const auto& f : normals) worst = std::max(worst, f.dot(u));
  return normals.empty() ? -1.0 : worst;
}

/// Result of a membership or intersection query against the relative interior
/// of a cone.
///
/// `margin` is the largest t such that the witness uses every (unit-scaled)
/// generator with weight at least t, capped at 1. A positive margin means the
/// witness lies in the relative interior of the cone; zero means only the
/// boundary is reachable.
struct ConeQuery {
  bool feasible = false;
  double margin = 0.0;
  /// Weights on the caller's generators: witness = sum_j coefficients[j] * g_j.
  Eigen::VectorXd coefficients;
  /// Convex weights on polytope vertices (intersection queries only).
  Eigen::VectorXd vertex_weights;
  double residual = 0.0;
};

/// Membership of w in the cone, decided by linear programming, together with
/// the relative-interior margin and a witness combination.
inline ConeQuery cone_membership_lp(const WrenchCone& cone, const Wrench& w,
                                    double tol = kConeTolerance) {
  ConeQuery q;
  const auto& gens = cone.generators;
  const auto n = static_cast<Eigen::Index>(gens.size());
  q.coefficients = Eigen::VectorXd::Zero(n);
  const double wn = w.norm();
  if (wn <= detail::kZeroNorm) {
    q.feasible = true;
    return q;
  }
  const Vec3 wu = w / wn;

  std::vector<double> gnorm(gens.size());
  std::vector<Eigen::Index> live;
  for (Eigen::Index j = 0; j < n; ++j) {
    gnorm[static_cast<std::size_t>(j)] = gens[static_cast<std::size_t>(j)].norm();
    if (gnorm[static_cast<std::size_t>(j)] > detail::kZeroNorm) live.push_back(j);
  }
  const auto k = static_cast<Eigen::Index>(live.size());

  // Columns: [mu' (k) | t | s]; generator weights are mu' + t.
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(4, k + 2);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(4);
  Eigen::VectorXd c = Eigen::VectorXd::Zero(k + 2);
  Vec3 gsum = Vec3::Zero();
  for (Eigen::Index j = 0; j < k; ++j) {
    const auto src = static_cast<std::size_t>(live[static_cast<std::size_t>(j)]);
    const Vec3 gu = gens[src] / gnorm[src];
    A.block<3, 1>(0, j) = gu;
    gsum += gu;
  }
  if (k > 0) {
    A.block<3, 1>(0, k) = gsum;
    A(3, k) = 1.0;
    c(k) = 1.0;
  }
  A(3, k + 1) = 1.0;
  b.head<3>() = wu;
  b(3) = 1.0;

  lp::Options opt;
  opt.feasibility_tol = tol;
  const auto res = lp::solve(A, b, c, opt);
  q.residual = res.infeasibility;
  if (res.status == lp::Status::Infeasible || res.status == lp::Status::IterationLimit) {
    return q;
  }
  q.feasible = true;
  q.margin = k > 0 ? res.x(k) : 0.0;
  for (Eigen::Index j = 0; j < k; ++j) {
    const auto src = live[static_cast<std::size_t>(j)];
    const double unit_weight = res.x(j) + (k > 0 ? res.x(k) : 0.0);
    q.coefficients(src) = unit_weight * wn / gnorm[static_cast<std::size_t>(src)];
  }
  return q;
}

/// Closed membership test: w is a nonnegative combination of the generators.
/// Uses the facet cache (or computes facets) for full-dimensional cones and
/// falls back to linear programming for degenerate ones. Scale invariant.
inline bool cone_contains(const WrenchCone& cone, const Wrench& w,
                          double tol = kConeTolerance) {
  if (w.norm() <= detail::kZeroNorm) return true;
  if (cone.face_normals) return max_facet_projection(*cone.face_normals, w) <= tol;
  if (cone_rank(cone) == 3) return max_facet_projection(face_normals(cone), w) <= tol;
  return cone_membership_lp(cone, w, tol).feasible;
}

/// Intersection of a bounded polytope (by vertices) and a cone, decided by
/// linear programming over convex vertex weights and cone generator weights.
inline ConeQuery polytope_cone_intersection_lp(const WrenchPolytope& poly, const WrenchCone& cone,
                                               double tol = kConeTolerance) {
  ConeQuery q;
  const auto& gens = cone.generators;
  const auto n = static_cast<Eigen::Index>(gens.size());
  const auto nv = static_cast<Eigen::Index>(poly.vertices.size());
  q.coefficients = Eigen::VectorXd::Zero(n);
  q.vertex_weights = Eigen::VectorXd::Zero(nv);
  if (nv == 0) return q;

  double vscale = 0.0;
  for (const auto& v : poly.vertices) vscale = std::max(vscale, v.norm());
  if (vscale <= detail::kZeroNorm) {
    // Polytope is the apex.
    q.feasible = true;
    q.vertex_weights.setConstant(1.0 / static_cast<double>(nv));
    return q;
  }

  std::vector<double> gnorm(gens.size());
  std::vector<Eigen::Index> live;
  for (Eigen::Index j = 0; j < n; ++j) {
    gnorm[static_cast<std::size_t>(j)] = gens[static_cast<std::size_t>(j)].norm();
    if (gnorm[static_cast<std::size_t>(j)] > detail::kZeroNorm) live.push_back(j);
  }
  const auto k = static_cast<Eigen::Index>(live.size());

  // Columns: [mu' (k) | t | lambda (nv) | s].
  const Eigen::Index ct = k, cl = k + 1, cs = k + 1 + nv;
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(5, cs + 1);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(5);
  Eigen::VectorXd c = Eigen::VectorXd::Zero(cs + 1);
  Vec3 gsum = Vec3::Zero();
  for (Eigen::Index j = 0; j < k; ++j) {
    const auto src = static_cast<std::size_t>(live[static_cast<std::size_t>(j)]);
    const Vec3 gu = gens[src] / gnorm[src];
    A.block<3, 1>(0, j) = gu;
    gsum += gu;
  }
  if (k > 0) {
    A.block<3, 1>(0, ct) = gsum;
    A(4, ct) = 1.0;
    c(ct) = 1.0;
  }
  for (Eigen::Index i = 0; i < nv; ++i) {
    A.block<3, 1>(0, cl + i) = -poly.vertices[static_cast<std::size_t>(i)] / vscale;
    A(3, cl + i) = 1.0;
  }
  A(4, cs) = 1.0;
  b(3) = 1.0;
  b(4) = 1.0;

  lp::Options opt;
  opt.feasibility_tol = tol;
  const auto res = lp::solve(A, b, c, opt);
  q.residual = res.infeasibility;
  if (res.status == lp::Status::Infeasible || res.status == lp::Status::IterationLimit) {
    return q;
  }
  q.feasible = true;
  const double t = k > 0 ? res.x(ct) : 0.0;
  q.margin = t;
  for (Eigen::Index j = 0; j < k; ++j) {
    const auto src = live[static_cast<std::size_t>(j)];
    q.coefficients(src) = (res.x(j) + t) * vscale / gnorm[static_cast<std::size_t>(src)];
  }
  for (Eigen::Index i = 0; i < nv; ++i) q.vertex_weights(i) = res.x(cl + i);
  const double wsum = q.vertex_weights.sum();
  if (wsum > 0.0) q.vertex_weights /= wsum;
  return q;
}

/// Closed intersection test between a polytope and a cone.
inline bool polytope_cone_intersects(const WrenchPolytope& poly, const WrenchCone& cone,
                                     double tol = kConeTolerance) {
  if (poly.vertices.empty()) throw std::invalid_argument("polytope has no vertices");
  if (poly.vertices.size() == 1) return cone_contains(cone, poly.vertices.front(), tol);
  return polytope_cone_intersection_lp(poly, cone, tol).feasible;
}

inline WrenchPolytope minkowski_sum_point_polytope(const Wrench& w, const WrenchPolytope& p) {
  WrenchPolytope out = p;
  for (auto& v : out.vertices) v += w;
  return out;
}

/// True when `point` is a convex combination of `others` (to tolerance).
inline bool in_convex_hull(const Vec3& point, std::span<const Vec3> others,
                           double tol = kConeTolerance) {
  if (others.empty()) return false;
  const auto k = static_cast<Eigen::Index>(others.size());
  double scale = point.norm();
  for (const auto& o : others) scale = std::max(scale, o.norm());
  if (scale <= detail::kZeroNorm) return true;
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(4, k);
  Eigen::VectorXd b(4);
  for (Eigen::Index i = 0; i < k; ++i) {
    A.block<3, 1>(0, i) = others[static_cast<std::size_t>(i)] / scale;
    A(3, i) = 1.0;
  }
  b.head<3>() = point / scale;
  b(3) = 1.0;
  lp::Options opt;
  opt.feasibility_tol = tol;
  const auto res = lp::solve(A, b, Eigen::VectorXd::Zero(k), opt);
  return res.status == lp::Status::Optimal;
}

}  // namespace stablepush
