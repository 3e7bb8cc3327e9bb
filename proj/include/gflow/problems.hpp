#ifndef GFLOW_PROBLEMS_HPP
#define GFLOW_PROBLEMS_HPP

#include <functional>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "gflow/fem.hpp"
#include "gflow/mesh.hpp"

namespace gflow {

struct ConstraintSet;
struct WaveFunction;

/// Four inverted Gaussian bells, shifted so that the potential is nonnegative:
/// V(x) = max(0, shift - sum_i amplitude * exp(-|x - c_i|^2 / (2 width^2))).
struct GaussianWellParams {
  std::vector<Point2> centers;
  double amplitude = 100.0;
  double width = 0.4;
  double shift = 100.0;
};

GaussianWellParams default_gaussian_wells();

/// Applies `gaussian.centers`, `gaussian.amplitude`, `gaussian.width` and
/// `gaussian.shift` overrides; centers are "x,y;x,y;...".
GaussianWellParams gaussian_wells_from(const std::map<std::string, std::string>& settings);

struct InitialGuessSpec {
  enum class Kind { interpolated_function, constant_interior };
  Kind kind = Kind::constant_interior;
  std::function<double(const Point2&)> function;
  double constant = 1.0;
  std::string label = "constant";
};

InitialGuessSpec constant_guess(double c = 1.0);
/// |sin(pi x) sin(pi y)| sign(y - 1)
InitialGuessSpec lshape_antisymmetric_guess();
/// sin(pi x) sin(pi y)
InitialGuessSpec lshape_product_guess();

struct ProblemDef {
  std::string name;
  DomainId domain = DomainId::unit_square;
  Potential potential;
  int default_initial_n = 4;
  /// Factor from the native eigenvalue (psi, psi)_H to the reported value.
  double laplace_report_scaling = 1.0;
  std::vector<double> references;
  std::string reference_note;
};

/// lshape_laplace, gaussian_wells or coulomb_singular.
ProblemDef make_problem(std::string_view name, const std::map<std::string, std::string>& settings = {});

/// Default guess for the k-th state (1 = ground state).
InitialGuessSpec default_initial_guess(const ProblemDef& problem, int state_index);

/// Interpolates the guess at interior vertices and projects it onto the
/// complement of the constraints, normalized.
WaveFunction make_initial_guess(const ProblemDef& problem, std::shared_ptr<const FeSpace> space,
                                const ConstraintSet& constraints, const SparseSymMatrix& mass,
                                const InitialGuessSpec& which);

/// Dirichlet Laplace eigenvalues used as references (empty if none known).
std::vector<double> reference_eigenvalues(std::string_view name);

Potential gaussian_wells_potential(const GaussianWellParams& params);

/// V(x) = strength / |x - center|, integrated exactly against P1 products.
Potential inverse_distance_potential(const Point2& center, double strength);

/// Integrals of lambda_a * lambda_b / |x - center| over a triangle, lambda the
/// barycentric coordinates. Closed form near the singularity, high-order
/// collapsed Gauss rules away from it.
Eigen::Matrix3d inverse_distance_moments(const std::array<Point2, 3>& tri, const Point2& center);

}  // namespace gflow

#endif  // GFLOW_PROBLEMS_HPP
