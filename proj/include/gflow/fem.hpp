#ifndef GFLOW_FEM_HPP
#define GFLOW_FEM_HPP

#include <array>
#include <functional>
#include <limits>
#include <memory>

#include <Eigen/Core>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>

#include "gflow/mesh.hpp"

namespace gflow {

using Vector = Eigen::VectorXd;
/// Symmetric sparse matrix. Compressed columns of a symmetric matrix are its
/// compressed rows.
using SparseSymMatrix = Eigen::SparseMatrix<double>;

inline constexpr int kNoDof = -1;
inline constexpr double kDefaultSolverTolerance = 1e-12;

/// Continuous P1 space with homogeneous Dirichlet values: one degree of
/// freedom per interior vertex.
class FeSpace {
 public:
  explicit FeSpace(std::shared_ptr<const Mesh> mesh);

  const Mesh& mesh() const { return *mesh_; }
  const std::shared_ptr<const Mesh>& mesh_ptr() const { return mesh_; }
  int n_dofs() const { return static_cast<int>(vertex_of_dof_.size()); }
  int dof_of_vertex(int v) const { return dof_of_vertex_[v]; }
  int vertex_of_dof(int d) const { return vertex_of_dof_[d]; }
  const std::vector<int>& dof_map() const { return dof_of_vertex_; }

  /// Per-vertex values, zero on the boundary.
  Vector to_vertex_values(const Vector& coeffs) const;
  Vector from_vertex_values(const Vector& values) const;

 private:
  std::shared_ptr<const Mesh> mesh_;
  std::vector<int> dof_of_vertex_;
  std::vector<int> vertex_of_dof_;
};

/// A nonnegative potential V. `element_moments`, when set, returns the exact
/// matrix of integrals of V * lambda_a * lambda_b over a triangle (lambda the
/// barycentric coordinates) and replaces quadrature in every assembly.
struct Potential {
  std::function<double(const Point2&)> value;
  std::function<Eigen::Matrix3d(const std::array<Point2, 3>&)> element_moments;
  bool zero = false;
};

Potential zero_potential();
Potential constant_potential(double c);

// Element matrices. Gradient terms carry the factor 1/2 of the H inner product.

template <typename Scalar>
Eigen::Matrix<Scalar, 3, 3> local_stiffness(const std::array<Eigen::Matrix<Scalar, 2, 1>, 3>& c) {
  const Scalar twice_area = (c[1].x() - c[0].x()) * (c[2].y() - c[0].y()) -
                            (c[1].y() - c[0].y()) * (c[2].x() - c[0].x());
  Eigen::Matrix<Scalar, 2, 3> grad;
  for (int k = 0; k < 3; ++k) {
    const auto& p = c[(k + 1) % 3];
    const auto& q = c[(k + 2) % 3];
    grad(0, k) = (p.y() - q.y()) / twice_area;
    grad(1, k) = (q.x() - p.x()) / twice_area;
  }
  return (Scalar(0.25) * twice_area) * (grad.transpose() * grad);
}

template <typename Scalar>
Eigen::Matrix<Scalar, 3, 3> local_mass(Scalar area) {
  Eigen::Matrix<Scalar, 3, 3> m;
  m.setConstant(Scalar(1));
  m.diagonal().setConstant(Scalar(2));
  return (area / Scalar(12)) * m;
}

/// Gradients of the barycentric coordinates (columns).
Eigen::Matrix<double, 2, 3> barycentric_gradients(const std::array<Point2, 3>& c);

/// Integrals of V * lambda_a * lambda_b; throws InvalidPotential if V is
/// negative or non-finite at a quadrature point.
Eigen::Matrix3d local_potential_mass(const Potential& potential, const std::array<Point2, 3>& c);

/// Element matrix of the H inner product.
Eigen::Matrix3d local_h_matrix(const Potential& potential, const std::array<Point2, 3>& c);

SparseSymMatrix assemble_h_matrix(const FeSpace& space, const Potential& potential);
SparseSymMatrix assemble_mass_matrix(const FeSpace& space);

/// Pre-elimination variants over all vertices (boundary included).
SparseSymMatrix assemble_full_h_matrix(const Mesh& mesh, const Potential& potential);
SparseSymMatrix assemble_full_mass_matrix(const Mesh& mesh);

// ---------------------------------------------------------------------------

enum class Preconditioner { cholesky, diagonal };

inline constexpr double kBackwardErrorTolerance = 8.0 * std::numeric_limits<double>::epsilon();

/// Preconditioned conjugate gradients for SPD systems. The default
/// preconditioner is a sparse LDL^T factorization, computed once and reused
/// for every right-hand side. The iteration cap is 20 * dimension.
class SpdSolver {
 public:
  explicit SpdSolver(SparseSymMatrix a, double rel_tol = kDefaultSolverTolerance,
                     Preconditioner preconditioner = Preconditioner::cholesky);

  /// Stops when ||b - A x|| <= rel_tol ||b||, or earlier when x already
  /// solves a componentwise-nearby system: max_i |r_i| / (|A| |x| + |b|)_i
  /// <= kBackwardErrorTolerance. On strongly graded meshes the rounding floor
  /// of the relative residual lies above 1e-12 while the backward error is at
  /// one ulp, and further iterations only amplify noise.
  Vector solve(const Vector& b) const;
  const SparseSymMatrix& matrix() const { return a_; }
  double tolerance() const { return rel_tol_; }

 private:
  Vector precondition(const Vector& r) const;

  SparseSymMatrix a_;
  SparseSymMatrix abs_a_;
  double rel_tol_;
  Preconditioner kind_;
  Eigen::SimplicialLDLT<SparseSymMatrix> factor_;
  Vector inverse_diagonal_;
};

Vector solve_spd(const SparseSymMatrix& a, const Vector& b, double rel_tol = kDefaultSolverTolerance);

/// Nodal interpolation at interior vertices; throws InvalidFunction on a
/// non-finite value.
Vector interpolate(const FeSpace& space, const std::function<double(const Point2&)>& f);

/// Canonical embedding of per-vertex values into a refined mesh.
Vector prolongate_vertex_values(const Vector& values, const RefinementMap& map);

/// Canonical embedding of a coefficient vector; throws InvalidMap when the
/// spaces do not match the map.
Vector prolongate(const Vector& coeffs, const FeSpace& old_space, const FeSpace& new_space,
                  const RefinementMap& map);

}  // namespace gflow

#endif  // GFLOW_FEM_HPP
