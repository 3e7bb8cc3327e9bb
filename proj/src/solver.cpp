#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "gflow/errors.hpp"
#include "gflow/fem.hpp"

namespace gflow {

SpdSolver::SpdSolver(SparseSymMatrix a, double rel_tol, Preconditioner preconditioner)
    : a_(std::move(a)), rel_tol_(rel_tol), kind_(preconditioner) {
  if (!(rel_tol > 0.0 && rel_tol <= 1e-6)) throw std::invalid_argument("solver tolerance must lie in (0, 1e-6]");
  if (a_.rows() != a_.cols()) throw SolverFailure("matrix is not square");
  if (a_.rows() == 0) return;
  abs_a_ = a_.cwiseAbs();
  if (kind_ == Preconditioner::cholesky) {
    factor_.compute(a_);
    if (factor_.info() != Eigen::Success || !(factor_.vectorD().minCoeff() > 0.0)) {
      throw SolverFailure("matrix is not positive definite");
    }
  } else {
    inverse_diagonal_ = a_.diagonal();
    if (!(inverse_diagonal_.minCoeff() > 0.0)) throw SolverFailure("matrix has a non-positive diagonal");
    inverse_diagonal_ = inverse_diagonal_.cwiseInverse();
  }
}

Vector SpdSolver::precondition(const Vector& r) const {
  if (kind_ == Preconditioner::cholesky) return factor_.solve(r);
  return inverse_diagonal_.cwiseProduct(r);
}

Vector SpdSolver::solve(const Vector& b) const {
  if (b.size() != a_.rows()) throw SolverFailure("right-hand side has the wrong length");
  Vector x = Vector::Zero(b.size());
  const double target = rel_tol_ * b.norm();
  if (b.size() == 0 || b.norm() == 0.0) return x;

  Vector r = b;
  Vector z = precondition(r);
  Vector p = z;
  double rz = r.dot(z);
  const long cap = 20 * static_cast<long>(b.size());
  for (long it = 0; it < cap; ++it) {
    const Vector ap = a_ * p;
    const double pap = p.dot(ap);
    if (!(pap > 0.0)) throw SolverFailure("conjugate gradients broke down");
    const double alpha = rz / pap;
    x.noalias() += alpha * p;
    // Recompute the true residual; recurrences drift below 1e-12.
    r = b - a_ * x;
    if (r.norm() <= target) return x;
    const Vector scale = abs_a_ * x.cwiseAbs() + b.cwiseAbs();
    double omega = 0.0;
    for (Eigen::Index i = 0; i < r.size(); ++i)
      if (scale[i] > 0.0) omega = std::max(omega, std::abs(r[i]) / scale[i]);
    if (omega <= kBackwardErrorTolerance) return x;
    z = precondition(r);
    const double rz_next = r.dot(z);
    p = z + (rz_next / rz) * p;
    rz = rz_next;
  }
  throw SolverFailure("conjugate gradients did not reach relative residual " + std::to_string(rel_tol_));
}

Vector solve_spd(const SparseSymMatrix& a, const Vector& b, double rel_tol) {
  return SpdSolver(a, rel_tol).solve(b);
}

}  // namespace gflow
