#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "fraclap/grid.hpp"

namespace fraclap {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// Exact integral of r^(-1-2s) over the cell ((m-1/2)h, (m+1/2)h):
//   lambda_m = [((m-1/2)h)^(-2s) - ((m+1/2)h)^(-2s)] / (2s).
// These are the coupling weights of the collocated scheme. The m = 0
// self-cell is dropped: its odd part cancels in the principal value and the
// even remainder is an O(h^(2-2s)) consistency error.
inline double kernel_weight(std::int64_t m, double h, double s) {
  if (m < 1) throw std::invalid_argument("kernel_weight: m must be >= 1");
  if (!(h > 0.0)) throw std::invalid_argument("kernel_weight: h must be > 0");
  if (!(s > 0.0 && s < 1.0))
    throw std::invalid_argument("kernel_weight: s must lie in (0,1)");
  const double md = static_cast<double>(m);
  const double a = (md - 0.5) * h;
  const double b = (md + 0.5) * h;
  return (std::pow(a, -2.0 * s) - std::pow(b, -2.0 * s)) / (2.0 * s);
}

// Full-lattice weight sum S = 2 * sum_{m>=1} lambda_m. The sum telescopes:
// S = (h/2)^(-2s) / s. With zero exterior data S is the (constant) diagonal.
inline double row_constant(double h, double s) {
  if (!(h > 0.0)) throw std::invalid_argument("row_constant: h must be > 0");
  if (!(s > 0.0 && s < 1.0))
    throw std::invalid_argument("row_constant: s must lie in (0,1)");
  return std::pow(0.5 * h, -2.0 * s) / s;
}

// Dense symmetric discretization of the unnormalized integral fractional
// Laplacian with zero exterior condition. M-matrix:
// constant positive diagonal S, nonpositive off-diagonals, strictly
// diagonally dominant on bounded domains, hence positive definite.
struct Operator {
  double s = 0.0;
  Grid grid;
  Matrix matrix;
  double row_sum = 0.0;  // S

  int n() const { return grid.n; }
};

// matrix[i][j] = -lambda_{|m_i - m_j|} for i != j; gaps between components
// enter only through larger lattice-index distances.
inline Operator assemble(const Grid& grid, double s) {
  if (grid.n < 1) throw std::invalid_argument("assemble: empty grid");
  Operator op;
  op.s = s;
  op.grid = grid;
  op.row_sum = row_constant(grid.h, s);

  const int n = grid.n;
  const std::int64_t max_dist = grid.indices.back() - grid.indices.front();
  std::vector<double> lambda(static_cast<std::size_t>(max_dist) + 1, 0.0);
  for (std::int64_t m = 1; m <= max_dist; ++m)
    lambda[static_cast<std::size_t>(m)] = kernel_weight(m, grid.h, s);

  op.matrix.resize(n, n);
  for (int i = 0; i < n; ++i) {
    op.matrix(i, i) = op.row_sum;
    for (int j = i + 1; j < n; ++j) {
      const std::int64_t d = grid.indices[j] - grid.indices[i];
      const double w = -lambda[static_cast<std::size_t>(d)];
      op.matrix(i, j) = w;
      op.matrix(j, i) = w;
    }
  }
  return op;
}

// Pointwise action: entry i approximates (-Delta)^s u(x_i) under zero
// extension of u outside the domain.
inline Vector apply(const Operator& op, const Vector& u) {
  if (u.size() != op.n())
    throw std::invalid_argument("apply: dimension mismatch");
  return op.matrix * u;
}

// Discrete Gagliardo energy h * u^T A u, the quadratic-form counterpart of
// [u]_s^2; equals h * f^T u whenever A u = f.
inline double energy(const Operator& op, const Vector& u) {
  if (u.size() != op.n())
    throw std::invalid_argument("energy: dimension mismatch");
  return op.grid.h * u.dot(op.matrix * u);
}

}  // namespace fraclap
