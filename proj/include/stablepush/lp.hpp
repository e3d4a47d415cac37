#pragma once

// Dense two-phase simplex for the small linear programs behind wrench-cone
// membership and intersection queries (3 to ~6 equality rows, a few dozen
// columns). Bland's rule is used throughout, so the method terminates on
// degenerate problems, which are common here (planar cones, apex queries).

#include <Eigen/Core>

#include <cmath>
#include <limits>
#include <vector>

namespace stablepush::lp {

enum class Status { Optimal, Infeasible, Unbounded, IterationLimit };

struct Result {
  Status status = Status::Infeasible;
  Eigen::VectorXd x;
  double objective = 0.0;
  /// Sum of artificial variables after phase 1 (zero when feasible).
  double infeasibility = 0.0;
};

struct Options {
  /// Phase-1 residual below which the equality system is accepted.
  double feasibility_tol = 1e-9;
  double pivot_tol = 1e-11;
};

namespace detail {

class Tableau {
 public:
  Tableau(Eigen::Index rows, Eigen::Index cols) : t_(rows + 1, cols + 1) { t_.setZero(); }

  double& operator()(Eigen::Index r, Eigen::Index c) { return t_(r, c); }
  double operator()(Eigen::Index r, Eigen::Index c) const { return t_(r, c); }
  Eigen::Index rows() const { return t_.rows() - 1; }
  Eigen::Index cols() const { return t_.cols() - 1; }
  Eigen::Index rhs() const { return t_.cols() - 1; }
  Eigen::Index obj() const { return t_.rows() - 1; }

  void pivot(Eigen::Index r, Eigen::Index c) {
    t_.row(r) /= t_(r, c);
    for (Eigen::Index i = 0; i < t_.rows(); ++i) {
      if (i == r) continue;
      const double f = t_(i, c);
      if (f != 0.0) t_.row(i) -= f * t_.row(r);
    }
  }

 private:
  Eigen::MatrixXd t_;
};

// Runs simplex iterations on `tab` maximizing the objective encoded in its last
// row as reduced costs (z_j - c_j). Columns with allowed[j] == false never
// enter.
inline Status iterate(Tableau& tab, std::vector<Eigen::Index>& basis,
                      const std::vector<bool>& allowed, double pivot_tol) {
  const Eigen::Index m = tab.rows();
  const Eigen::Index n = tab.cols();
  const int max_iter = static_cast<int>(50 * (m + n) + 100);
  for (int it = 0; it < max_iter; ++it) {
    Eigen::Index enter = -1;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (allowed[static_cast<std::size_t>(j)] && tab(tab.obj(), j) < -pivot_tol) {
        enter = j;
        break;
      }
    }
    if (enter < 0) return Status::Optimal;

    Eigen::Index leave = -1;
    double best = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < m; ++i) {
      const double a = tab(i, enter);
      if (a <= pivot_tol) continue;
      const double ratio = tab(i, tab.rhs()) / a;
      if (ratio < best - 1e-15 ||
          (std::abs(ratio - best) <= 1e-15 && leave >= 0 &&
           basis[static_cast<std::size_t>(i)] < basis[static_cast<std::size_t>(leave)])) {
        best = ratio;
        leave = i;
      }
    }
    if (leave < 0) return Status::Unbounded;
    tab.pivot(leave, enter);
    basis[static_cast<std::size_t>(leave)] = enter;
  }
  return Status::IterationLimit;
}

}  // namespace detail

/// Maximizes c.x subject to A x = b, x >= 0.
inline Result solve(const Eigen::MatrixXd& A, const Eigen::VectorXd& b,
                    const Eigen::VectorXd& c, const Options& opt = {}) {
  const Eigen::Index m = A.rows();
  const Eigen::Index n = A.cols();
  detail::Tableau tab(m, n + m);
  std::vector<Eigen::Index> basis(static_cast<std::size_t>(m));

  for (Eigen::Index i = 0; i < m; ++i) {
    const double sign = b(i) < 0.0 ? -1.0 : 1.0;
    for (Eigen::Index j = 0; j < n; ++j) tab(i, j) = sign * A(i, j);
    tab(i, n + i) = 1.0;
    tab(i, tab.rhs()) = sign * b(i);
    basis[static_cast<std::size_t>(i)] = n + i;
  }

  // Phase 1: maximize -(sum of artificials).
  for (Eigen::Index j = 0; j < n; ++j) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < m; ++i) s += tab(i, j);
    tab(tab.obj(), j) = -s;
  }
  {
    double s = 0.0;
    for (Eigen::Index i = 0; i < m; ++i) s += tab(i, tab.rhs());
    tab(tab.obj(), tab.rhs()) = -s;
  }
  std::vector<bool> allowed(static_cast<std::size_t>(n + m), true);
  Result res;
  Status st = detail::iterate(tab, basis, allowed, opt.pivot_tol);
  if (st == Status::IterationLimit) {
    res.status = st;
    return res;
  }
  res.infeasibility = std::max(0.0, -tab(tab.obj(), tab.rhs()));
  if (res.infeasibility > opt.feasibility_tol) {
    res.status = Status::Infeasible;
    res.x = Eigen::VectorXd::Zero(n);
    for (Eigen::Index i = 0; i < m; ++i) {
      const auto bi = basis[static_cast<std::size_t>(i)];
      if (bi < n) res.x(bi) = tab(i, tab.rhs());
    }
    return res;
  }

  // Drive remaining artificials out of the basis; rows where that is impossible
  // are redundant and keep their (zero-valued) artificial.
  for (Eigen::Index i = 0; i < m; ++i) {
    if (basis[static_cast<std::size_t>(i)] < n) continue;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (std::abs(tab(i, j)) > opt.pivot_tol) {
        tab.pivot(i, j);
        basis[static_cast<std::size_t>(i)] = j;
        break;
      }
    }
  }
  for (Eigen::Index j = n; j < n + m; ++j) allowed[static_cast<std::size_t>(j)] = false;

  // Phase 2 reduced costs.
  for (Eigen::Index j = 0; j <= tab.cols(); ++j) {
    double z = 0.0;
    for (Eigen::Index i = 0; i < m; ++i) {
      const auto bi = basis[static_cast<std::size_t>(i)];
      if (bi < n) z += c(bi) * tab(i, j);
    }
    if (j < n) {
      tab(tab.obj(), j) = z - c(j);
    } else if (j == tab.rhs()) {
      tab(tab.obj(), j) = z;
    } else {
      tab(tab.obj(), j) = 0.0;
    }
  }
  st = detail::iterate(tab, basis, allowed, opt.pivot_tol);
  res.status = st;
  res.x = Eigen::VectorXd::Zero(n);
  for (Eigen::Index i = 0; i < m; ++i) {
    const auto bi = basis[static_cast<std::size_t>(i)];
    if (bi < n) res.x(bi) = std::max(0.0, tab(i, tab.rhs()));
  }
  res.objective = c.dot(res.x);
  return res;
}

}  // namespace stablepush::lp
