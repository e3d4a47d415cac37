#pragma once

// Shared fixtures and independent oracles for the test suites. Nothing here
// calls into the LP or facet code under test.

#include "stablepush/scene_io.hpp"

#include <Eigen/Dense>

#include <random>
#include <string>
#include <vector>

#ifndef STABLEPUSH_SOURCE_DIR
#define STABLEPUSH_SOURCE_DIR "."
#endif

namespace sptest {

using stablepush::Vec3;

inline std::string source_path(const std::string& rel) { return std::string(STABLEPUSH_SOURCE_DIR) + "/" + rel; }

inline stablepush::Scene load(const std::string& rel) { return stablepush::load_scene(source_path(rel)); }

/// Lawson-Hanson non-negative least squares: argmin ||A x - b|| s.t. x >= 0.
inline Eigen::VectorXd nnls(const Eigen::MatrixXd& A, const Eigen::VectorXd& b, int max_iter = 500) {
  const Eigen::Index n = A.cols();
  Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
  std::vector<bool> passive(static_cast<std::size_t>(n), false);
  const double tol = 1e-13 * std::max(1.0, A.norm() * b.norm());
  for (int outer = 0; outer < max_iter; ++outer) {
    const Eigen::VectorXd w = A.transpose() * (b - A * x);
    Eigen::Index best = -1;
    double wmax = tol;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (!passive[static_cast<std::size_t>(j)] && w(j) > wmax) {
        wmax = w(j);
        best = j;
      }
    }
    if (best < 0) break;
    passive[static_cast<std::size_t>(best)] = true;
    for (int inner = 0; inner < max_iter; ++inner) {
      std::vector<Eigen::Index> idx;
      for (Eigen::Index j = 0; j < n; ++j) {
        if (passive[static_cast<std::size_t>(j)]) idx.push_back(j);
      }
      Eigen::MatrixXd Ap(A.rows(), static_cast<Eigen::Index>(idx.size()));
      for (std::size_t k = 0; k < idx.size(); ++k) Ap.col(static_cast<Eigen::Index>(k)) = A.col(idx[k]);
      const Eigen::VectorXd zp = Ap.completeOrthogonalDecomposition().solve(b);
      Eigen::VectorXd z = Eigen::VectorXd::Zero(n);
      for (std::size_t k = 0; k < idx.size(); ++k) z(idx[k]) = zp(static_cast<Eigen::Index>(k));
      bool ok = true;
      for (auto j : idx) ok = ok && z(j) > 0.0;
      if (ok) {
        x = z;
        break;
      }
      double alpha = 1.0;
      for (auto j : idx) {
        if (z(j) <= 0.0) alpha = std::min(alpha, x(j) / (x(j) - z(j)));
      }
      x += alpha * (z - x);
      for (auto j : idx) {
        if (x(j) <= 1e-15) {
          x(j) = 0.0;
          passive[static_cast<std::size_t>(j)] = false;
        }
      }
    }
  }
  return x;
}

inline Eigen::MatrixXd columns(const std::vector<Vec3>& v) {
  Eigen::MatrixXd m(3, static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) m.col(static_cast<Eigen::Index>(i)) = v[i];
  return m;
}

/// Relative NNLS residual of w against the generators.
inline double nnls_residual(const std::vector<Vec3>& gens, const Vec3& w) {
  if (gens.empty()) return w.norm() > 0.0 ? 1.0 : 0.0;
  const Eigen::MatrixXd G = columns(gens);
  const Eigen::VectorXd x = nnls(G, w);
  return (G * x - w).norm() / std::max(w.norm(), 1e-300);
}

/// Unit vector uniform on the sphere.
inline Vec3 random_direction(std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Vec3 v(n(rng), n(rng), n(rng));
  return v / v.norm();
}

/// Pointed random cone: k generators within `spread` (0..1) of an axis.
inline std::vector<Vec3> random_pointed_cone(std::mt19937_64& rng, int k, double spread) {
  const Vec3 axis = random_direction(rng);
  std::vector<Vec3> g;
  for (int i = 0; i < k; ++i) {
    Vec3 d = axis + spread * random_direction(rng);
    g.push_back(d * std::uniform_real_distribution<double>(0.2, 3.0)(rng));
  }
  return g;
}

/// Largest angle-like distance of a unit direction to the boundary of a cone,
/// estimated from the NNLS residual under small perturbations. Used to skip
/// marginal cases that neither oracle can decide robustly.
inline bool near_cone_boundary(const std::vector<Vec3>& gens, const Vec3& w, double eps) {
  const Vec3 u = w / w.norm();
  const double r0 = nnls_residual(gens, u);
  if (r0 > eps) return r0 < 4.0 * eps;
  for (int a = 0; a < 3; ++a) {
    for (double s : {-1.0, 1.0}) {
      Vec3 p = u;
      p(a) += s * eps * 4.0;
      if (nnls_residual(gens, p) > 1e-12) return true;
    }
  }
  return false;
}

}  // namespace sptest
