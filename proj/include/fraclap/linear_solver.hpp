#pragma once

#include <Eigen/Cholesky>
#include <cmath>
#include <stdexcept>

#include "fraclap/fractional_operator.hpp"

namespace fraclap {

enum class SolveMethod { direct, iterative };

struct SolveReport {
  Vector u;
  double residual_inf = 0.0;  // max_i |(A u - f)_i|, recomputed after the solve
  int iterations = 0;         // 0 for direct
  SolveMethod method = SolveMethod::direct;
};

inline double residual_inf_norm(const Operator& op, const Vector& u,
                                const Vector& f) {
  return (op.matrix * u - f).lpNorm<Eigen::Infinity>();
}

// Cholesky solver with a cached factorization; the reference route for every
// energy evaluation. One step of iterative refinement keeps the recomputed
// residual within tol * (1 + max|f|) even for ill-scaled h.
class DirectSolver {
 public:
  explicit DirectSolver(const Operator& op, double tol = 1e-10)
      : op_(&op), tol_(tol), llt_(op.matrix) {
    if (llt_.info() != Eigen::Success)
      throw std::runtime_error(
          "DirectSolver: Cholesky factorization failed (operator is not SPD)");
  }

  SolveReport solve(const Vector& f) const {
    if (f.size() != op_->n())
      throw std::invalid_argument("solve: dimension mismatch");
    SolveReport rep;
    rep.method = SolveMethod::direct;
    rep.u = llt_.solve(f);
    const double target = tol_ * (1.0 + f.lpNorm<Eigen::Infinity>());
    rep.residual_inf = residual_inf_norm(*op_, rep.u, f);
    if (rep.residual_inf > 0.25 * target) {
      rep.u += llt_.solve(f - op_->matrix * rep.u);
      rep.residual_inf = residual_inf_norm(*op_, rep.u, f);
    }
    return rep;
  }

  const Operator& op() const { return *op_; }

 private:
  const Operator* op_;
  double tol_;
  Eigen::LLT<Matrix> llt_;
};

inline SolveReport solve_direct(const Operator& op, const Vector& f) {
  return DirectSolver(op).solve(f);
}

// Preconditioned conjugate gradients, diagonal preconditioner (the diagonal
// is the constant S, so this is a scalar scaling). Independent cross-check of
// the direct route. Stops at relative 2-norm residual <= tol; throws if
// max_iter is exhausted first.
inline SolveReport solve_iterative(const Operator& op, const Vector& f,
                                   double tol, int max_iter) {
  if (f.size() != op.n())
    throw std::invalid_argument("solve_iterative: dimension mismatch");
  if (!(tol > 0.0)) throw std::invalid_argument("solve_iterative: tol <= 0");
  if (max_iter < 1)
    throw std::invalid_argument("solve_iterative: max_iter < 1");

  SolveReport rep;
  rep.method = SolveMethod::iterative;
  const double fnorm = f.norm();
  rep.u = Vector::Zero(f.size());
  if (fnorm == 0.0) {
    rep.iterations = 0;
    rep.residual_inf = 0.0;
    return rep;
  }

  const double inv_diag = 1.0 / op.row_sum;
  Vector r = f;  // r = f - A*0
  Vector z = inv_diag * r;
  Vector p = z;
  double rz = r.dot(z);
  for (int it = 1; it <= max_iter; ++it) {
    const Vector Ap = op.matrix * p;
    const double alpha = rz / p.dot(Ap);
    rep.u += alpha * p;
    r -= alpha * Ap;
    if (r.norm() <= tol * fnorm) {
      rep.iterations = it;
      rep.residual_inf = residual_inf_norm(op, rep.u, f);
      return rep;
    }
    z = inv_diag * r;
    const double rz_new = r.dot(z);
    p = z + (rz_new / rz) * p;
    rz = rz_new;
  }
  throw std::runtime_error(
      "solve_iterative: max_iter exceeded without reaching tol");
}

}  // namespace fraclap
