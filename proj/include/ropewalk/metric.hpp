#pragma once

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include <vector>

#include "geometry.hpp"

namespace ropewalk {

/// Inner product M = I + alpha * D on vertex displacements, where D is the
/// cyclic graph Laplacian of each component and alpha = (smoothing / h)^2 for
/// average edge length h. Descent and correction steps measured in this metric
/// are smooth along the curve, so they do not open kinks between neighbouring
/// vertices.
class SobolevMetric {
 public:
  SobolevMetric(const PolyLink& link, double smoothing_length) : n_(link.num_vertices()) {
    const double h = average_edge_length(link);
    const double alpha = smoothing_length > 0.0 ? (smoothing_length / h) * (smoothing_length / h) : 0.0;
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(static_cast<std::size_t>(3 * n_));
    int off = 0;
    for (const auto& c : link.components()) {
      const int m = c.size();
      for (int i = 0; i < m; ++i) {
        const int row = off + i;
        trips.emplace_back(row, row, 1.0 + 2.0 * alpha);
        trips.emplace_back(row, off + (i + 1) % m, -alpha);
        trips.emplace_back(row, off + (i + m - 1) % m, -alpha);
      }
      off += m;
    }
    Eigen::SparseMatrix<double> mat(n_, n_);
    mat.setFromTriplets(trips.begin(), trips.end());
    solver_.compute(mat);
    if (solver_.info() != Eigen::Success) throw NumericalError("metric factorisation failed");
    // Each component's block is circulant, so its inverse is determined by
    // the response to a unit load at the component's first vertex.
    off = 0;
    for (const auto& c : link.components()) {
      Eigen::VectorXd e = Eigen::VectorXd::Zero(n_);
      e(off) = 1.0;
      kernels_.push_back(solver_.solve(e).segment(off, c.size()));
      offsets_.push_back(off);
      off += c.size();
    }
  }

  /// The inverse restricted to component c: entry (i, j) of the
  /// component block is kernel(c)((j - i) mod n).
  const Eigen::VectorXd& kernel(int c) const { return kernels_[static_cast<std::size_t>(c)]; }
  int component_offset(int c) const { return offsets_[static_cast<std::size_t>(c)]; }

  /// Applies M^-1 to a flat 3N vector of per-vertex displacements.
  Eigen::VectorXd solve(const Eigen::VectorXd& flat) const {
    Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, 3, Eigen::RowMajor>> rhs(flat.data(), n_, 3);
    const Eigen::Matrix<double, Eigen::Dynamic, 3> cols = rhs;
    const Eigen::Matrix<double, Eigen::Dynamic, 3> sol = solver_.solve(cols);
    Eigen::VectorXd out(3 * n_);
    Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, 3, Eigen::RowMajor>>(out.data(), n_, 3) = sol;
    return out;
  }

 private:
  int n_;
  std::vector<Eigen::VectorXd> kernels_;
  std::vector<int> offsets_;
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver_;
};

}  // namespace ropewalk
