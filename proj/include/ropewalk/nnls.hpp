#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

#include "error.hpp"

namespace ropewalk {

struct NnlsResult {
  Eigen::VectorXd x;
  int iterations = 0;
  /// Dual variable rhs - gram * x: zero on the positive set, <= tol elsewhere.
  Eigen::VectorXd dual;
};

namespace detail {

/// Cholesky factor L L^T of the Gram submatrix on an ordered column set,
/// updated in O(k^2) as columns enter and leave.
class GrowingCholesky {
 public:
  explicit GrowingCholesky(Eigen::Index capacity) : l_(Eigen::MatrixXd::Zero(capacity, capacity)) {}

  Eigen::Index size() const noexcept { return k_; }

  /// Appends a column with Gram cross terms `cross` (length size()) and
  /// diagonal `diag`. Returns false, leaving the factor unchanged, when the
  /// column is numerically dependent on the current set.
  bool append(const Eigen::VectorXd& cross, double diag) {
    Eigen::VectorXd row = cross;
    if (k_ > 0) l_.topLeftCorner(k_, k_).triangularView<Eigen::Lower>().solveInPlace(row);
    const double pivot = diag - row.squaredNorm();
    if (!(pivot > kDependence * diag)) return false;
    l_.row(k_).head(k_) = row.transpose();
    l_(k_, k_) = std::sqrt(pivot);
    ++k_;
    return true;
  }

  /// Removes the column at position p, restoring triangularity with Givens
  /// rotations on adjacent columns.
  void remove(Eigen::Index p) {
    for (Eigen::Index r = p; r + 1 < k_; ++r) l_.row(r).head(k_) = l_.row(r + 1).head(k_);
    for (Eigen::Index c = p; c + 1 < k_; ++c) {
      const double a = l_(c, c);
      const double b = l_(c, c + 1);
      const double h = std::hypot(a, b);
      const double cs = a / h;
      const double sn = b / h;
      for (Eigen::Index i = c; i + 1 < k_; ++i) {
        const double x = l_(i, c);
        const double y = l_(i, c + 1);
        l_(i, c) = cs * x + sn * y;
        l_(i, c + 1) = -sn * x + cs * y;
      }
    }
    --k_;
    l_.row(k_).setZero();
    l_.col(k_).setZero();
  }

  Eigen::VectorXd solve(Eigen::VectorXd rhs) const {
    const auto tri = l_.topLeftCorner(k_, k_).triangularView<Eigen::Lower>();
    tri.solveInPlace(rhs);
    tri.transpose().solveInPlace(rhs);
    return rhs;
  }

 private:
  static constexpr double kDependence = 1e-12;
  Eigen::MatrixXd l_;
  Eigen::Index k_ = 0;
};

}  // namespace detail

/// Lawson-Hanson active-set NNLS in Gram form: minimises
/// 0.5 x^T gram x - rhs^T x over x >= 0, which for gram = A^T A and rhs = A^T b
/// is argmin_{x >= 0} |A x - b|. `warm` seeds the positive set; `tol` bounds the
/// dual variable on the zero set at termination. Throws NumericalError with the
/// remaining dual infeasibility if the iteration cap is reached.
inline NnlsResult nnls_gram(const Eigen::MatrixXd& gram, const Eigen::VectorXd& rhs, double tol,
                            std::vector<int> warm = {}, int max_iterations = -1) {
  const auto m = rhs.size();
  if (max_iterations < 0) max_iterations = static_cast<int>(3 * m + 50);
  NnlsResult res;
  res.x = Eigen::VectorXd::Zero(m);
  res.dual = rhs;

  detail::GrowingCholesky chol(m);
  std::vector<int> passive;  // ordered as in the factor
  std::vector<char> in_passive(static_cast<std::size_t>(m), 0);
  // Columns rejected as dependent or immediately undone by roundoff; retried
  // once the positive set changes.
  std::vector<char> skip(static_cast<std::size_t>(m), 0);

  auto sub_rhs = [&] {
    Eigen::VectorXd r(static_cast<Eigen::Index>(passive.size()));
    for (std::size_t i = 0; i < passive.size(); ++i) r(static_cast<Eigen::Index>(i)) = rhs(passive[i]);
    return r;
  };
  auto try_add = [&](int j) {
    Eigen::VectorXd cross(static_cast<Eigen::Index>(passive.size()));
    for (std::size_t i = 0; i < passive.size(); ++i) cross(static_cast<Eigen::Index>(i)) = gram(passive[i], j);
    if (!chol.append(cross, gram(j, j))) return false;
    passive.push_back(j);
    in_passive[static_cast<std::size_t>(j)] = 1;
    return true;
  };
  auto drop_at = [&](std::size_t pos) {
    in_passive[static_cast<std::size_t>(passive[pos])] = 0;
    chol.remove(static_cast<Eigen::Index>(pos));
    passive.erase(passive.begin() + static_cast<std::ptrdiff_t>(pos));
  };

  // Warm start: least squares on the guessed support, dropping non-positive
  // entries until the solution there is strictly positive.
  std::sort(warm.begin(), warm.end());
  warm.erase(std::unique(warm.begin(), warm.end()), warm.end());
  for (int j : warm)
    if (j >= 0 && j < m && gram(j, j) > 0.0) try_add(j);
  while (!passive.empty()) {
    const Eigen::VectorXd z = chol.solve(sub_rhs());
    bool dropped = false;
    for (std::size_t i = passive.size(); i-- > 0;)
      if (!(z(static_cast<Eigen::Index>(i)) > 0.0)) {
        drop_at(i);
        dropped = true;
      }
    if (!dropped) {
      for (std::size_t i = 0; i < passive.size(); ++i) res.x(passive[i]) = z(static_cast<Eigen::Index>(i));
      break;
    }
  }

  int it = 0;
  for (;;) {
    res.dual = rhs;
    for (int p : passive) res.dual.noalias() -= res.x(p) * gram.col(p);
    int enter = -1;
    double best = tol;
    for (Eigen::Index j = 0; j < m; ++j)
      if (!in_passive[static_cast<std::size_t>(j)] && !skip[static_cast<std::size_t>(j)] && res.dual(j) > best) {
        best = res.dual(j);
        enter = static_cast<int>(j);
      }
    if (enter < 0) break;
    if (++it > max_iterations) {
      std::ostringstream msg;
      msg << "NNLS did not converge after " << max_iterations << " iterations; max dual "
          << res.dual.maxCoeff() << " (tol " << tol << "), positive set size " << passive.size();
      throw NumericalError(msg.str());
    }
    if (!try_add(enter)) {
      skip[static_cast<std::size_t>(enter)] = 1;
      continue;
    }

    for (;;) {
      const Eigen::VectorXd z = chol.solve(sub_rhs());
      double alpha = 1.0;
      int blocking = -1;
      for (std::size_t i = 0; i < passive.size(); ++i) {
        const double zi = z(static_cast<Eigen::Index>(i));
        if (zi <= 0.0) {
          const double xi = res.x(passive[i]);
          const double a = xi / (xi - zi);
          if (blocking < 0 || a < alpha) {
            alpha = a;
            blocking = passive[i];
          }
        }
      }
      if (blocking < 0) {
        for (std::size_t i = 0; i < passive.size(); ++i) res.x(passive[i]) = z(static_cast<Eigen::Index>(i));
        break;
      }
      // Move toward z until the first coordinate reaches zero, then drop every
      // coordinate that is no longer positive.
      for (std::size_t i = 0; i < passive.size(); ++i)
        res.x(passive[i]) += alpha * (z(static_cast<Eigen::Index>(i)) - res.x(passive[i]));
      res.x(blocking) = 0.0;
      for (std::size_t i = passive.size(); i-- > 0;)
        if (res.x(passive[i]) <= 0.0) {
          res.x(passive[i]) = 0.0;
          drop_at(i);
        }
      if (passive.empty()) break;
    }
    if (in_passive[static_cast<std::size_t>(enter)])
      std::fill(skip.begin(), skip.end(), 0);
    else
      skip[static_cast<std::size_t>(enter)] = 1;
  }
  res.iterations = it;
  return res;
}

/// Lawson-Hanson NNLS on explicit columns: argmin_{x >= 0} |A x - b|.
inline NnlsResult nnls(const Eigen::MatrixXd& a, const Eigen::VectorXd& b, std::vector<int> warm = {}) {
  const Eigen::MatrixXd gram = a.transpose() * a;
  const Eigen::VectorXd rhs = a.transpose() * b;
  const double col = gram.size() ? std::sqrt(gram.diagonal().maxCoeff()) : 0.0;
  return nnls_gram(gram, rhs, 1e-13 * std::max(col * b.norm(), 1e-300), std::move(warm));
}

}  // namespace ropewalk
