#ifndef GFLOW_QUADRATURE_HPP
#define GFLOW_QUADRATURE_HPP

#include <array>
#include <vector>

#include <Eigen/Core>

namespace gflow {

/// Quadrature on triangles in barycentric form. Weights sum to one and are
/// scaled by the element area when the rule is applied.
template <typename Scalar, int Points>
struct QuadratureRule {
  std::array<Eigen::Matrix<Scalar, 3, 1>, Points> points;
  std::array<Scalar, Points> weights;

  static constexpr int size() { return Points; }

  /// Integral of f over the triangle with the given corners.
  template <typename Corners, typename F>
  Scalar integrate(const Corners& c, Scalar area, F&& f) const {
    Scalar sum(0);
    for (int q = 0; q < Points; ++q) sum += weights[q] * f(map(c, q), points[q]);
    return area * sum;
  }

  template <typename Corners>
  auto map(const Corners& c, int q) const {
    return (points[q](0) * c[0] + points[q](1) * c[1] + points[q](2) * c[2]).eval();
  }
};

/// Symmetric six-point rule, exact for polynomials of degree four. All points
/// lie strictly inside the triangle.
template <typename Scalar = double>
const QuadratureRule<Scalar, 6>& degree4_rule() {
  static const QuadratureRule<Scalar, 6> rule = [] {
    const Scalar a = Scalar(0.445948490915964886318329253883);
    const Scalar b = Scalar(0.091576213509770743459571463402);
    const Scalar wa = Scalar(0.223381589678011465944691098907);
    const Scalar wb = Scalar(0.109951743655321867388642234426);
    QuadratureRule<Scalar, 6> r;
    r.points = {Eigen::Matrix<Scalar, 3, 1>(a, a, 1 - 2 * a), Eigen::Matrix<Scalar, 3, 1>(a, 1 - 2 * a, a),
                Eigen::Matrix<Scalar, 3, 1>(1 - 2 * a, a, a), Eigen::Matrix<Scalar, 3, 1>(b, b, 1 - 2 * b),
                Eigen::Matrix<Scalar, 3, 1>(b, 1 - 2 * b, b), Eigen::Matrix<Scalar, 3, 1>(1 - 2 * b, b, b)};
    r.weights = {wa, wa, wa, wb, wb, wb};
    return r;
  }();
  return rule;
}

/// n-point Gauss-Legendre nodes and weights on [0, 1].
struct GaussLegendre {
  std::vector<double> nodes;
  std::vector<double> weights;
};

GaussLegendre gauss_legendre(int n);

}  // namespace gflow

#endif  // GFLOW_QUADRATURE_HPP
