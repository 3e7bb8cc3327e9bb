#ifndef GFLOW_FLOW_HPP
#define GFLOW_FLOW_HPP

#include <memory>
#include <vector>

#include "gflow/fem.hpp"
#include "gflow/mesh.hpp"

namespace gflow {

/// A coefficient vector together with the space it lives in.
struct WaveFunction {
  std::shared_ptr<const FeSpace> space;
  Vector coeffs;
};

/// A previously computed state on its own mesh.
struct Donor {
  std::shared_ptr<const FeSpace> space;
  Vector coeffs;
  /// Per-vertex values, zero on the boundary.
  Vector values;
  double eigenvalue = 0.0;
  std::shared_ptr<const PointLocator> locator;

  /// Value at a point of the domain (P1 interpolation on the donor mesh).
  double evaluate(const Point2& p) const;
};

Donor make_donor(std::shared_ptr<const FeSpace> space, Vector coeffs, double eigenvalue = 0.0);
Donor make_donor(const WaveFunction& psi, double eigenvalue = 0.0);

/// Known states and their L2-orthonormal representatives in the current
/// space. `weighted[i]` caches M * representatives[i].
struct ConstraintSet {
  std::vector<Donor> donors;
  std::vector<Vector> representatives;
  std::vector<Vector> weighted;

  int size() const { return static_cast<int>(representatives.size()); }
  bool empty() const { return representatives.empty(); }
};

struct GfiParams {
  double tau_max = 1.0;
  int backtrack_cap = 30;
  double gamma_stop = 0.1;
  double theta = 0.5;
  double solver_tol = kDefaultSolverTolerance;

  /// Throws std::invalid_argument on out-of-range values.
  void validate() const;
};

/// Matrices and the factorized solver of one mesh.
struct Discretization {
  std::shared_ptr<const FeSpace> space;
  SparseSymMatrix a;
  SparseSymMatrix m;
  std::shared_ptr<const SpdSolver> solver;
};

Discretization discretize(std::shared_ptr<const FeSpace> space, const Potential& potential,
                          double solver_tol = kDefaultSolverTolerance);

/// Solves A g = M u.
Vector apply_g(const SpdSolver& solver, const SparseSymMatrix& m, const Vector& u);
Vector apply_g(const SparseSymMatrix& a, const SparseSymMatrix& m, const Vector& u,
               double rel_tol = kDefaultSolverTolerance);

/// u^T A u / 2.
double energy(const SparseSymMatrix& a, const Vector& u);
/// u^T A u; the eigenvalue when u is a normalized discrete eigenfunction.
double eigenvalue_estimate(const SparseSymMatrix& a, const SparseSymMatrix& m, const Vector& u);

double l2_norm(const SparseSymMatrix& m, const Vector& u);
/// max_i |(u, rep_i)_L2|, 0 without constraints.
double max_constraint_violation(const ConstraintSet& constraints, const Vector& u);

/// Removes the components along the representatives and normalizes in L2.
/// The coefficient of largest magnitude is made positive. Throws
/// DegenerateIterate if less than 1e-14 remains.
Vector project_and_normalize(Vector psi_hat, const ConstraintSet& constraints, const SparseSymMatrix& m);

/// One step with a given g = apply_g(u).
Vector gfi_step(const Vector& u, const Vector& g, double tau, const Discretization& disc,
                const ConstraintSet& constraints);
WaveFunction gfi_step(const WaveFunction& psi, double tau, const Discretization& disc,
                      const ConstraintSet& constraints);

struct StepResult {
  double tau = 0.0;
  Vector psi;
  double energy = 0.0;
  int trials = 0;
};

/// Halves tau from tau_max until the energy strictly decreases. Throws
/// Stagnation when backtrack_cap halvings do not help.
StepResult select_time_step(const Vector& u, const Discretization& disc, const ConstraintSet& constraints,
                            const GfiParams& params);

/// Loads b_j = integral of donor * phi_j over the target mesh. Exact when the
/// two meshes share a coarse ancestor (elements nested or disjoint); other
/// elements fall back to the degree-4 rule with point evaluation.
Vector load_vector(const Donor& donor, const FeSpace& target);

/// L2 projections of the donors onto the target space, orthonormalized by
/// modified Gram-Schmidt in donor order. Throws DegenerateConstraint when a
/// projected donor has norm below 1e-10.
ConstraintSet project_constraints_to_space(std::vector<Donor> donors, const FeSpace& target,
                                           const SparseSymMatrix& m, double solver_tol = kDefaultSolverTolerance);

/// (a, b)_L2 of two states on possibly different meshes.
double cross_inner_product(const Donor& a, const Donor& b);

}  // namespace gflow

#endif  // GFLOW_FLOW_HPP
