#include "gflow/estimator.hpp"

#include <cmath>
#include <numeric>

#include "gflow/quadrature.hpp"

namespace gflow {

namespace {

Eigen::Vector2d gradient(const Mesh& mesh, const Vector& values, int t) {
  const Triangle& tri = mesh.triangle(t);
  const Eigen::Matrix<double, 2, 3> g = barycentric_gradients(mesh.corners(t));
  return g * Eigen::Vector3d(values[tri[0]], values[tri[1]], values[tri[2]]);
}

}  // namespace

double normal_jump(const Mesh& mesh, const Vector& vertex_values, int element, int k) {
  const int other = mesh.neighbors()[element][k];
  if (other == kBoundary) return 0.0;
  const auto c = mesh.corners(element);
  const Point2 edge = c[(k + 2) % 3] - c[(k + 1) % 3];
  // Counterclockwise storage: the outward normal is the edge rotated clockwise.
  const Eigen::Vector2d normal = Eigen::Vector2d(edge.y(), -edge.x()).normalized();
  return (gradient(mesh, vertex_values, element) - gradient(mesh, vertex_values, other)).dot(normal);
}

double element_eta_sq(const Mesh& mesh, const Vector& vertex_values, double e_psi, const Potential& potential,
                      int element) {
  const auto c = mesh.corners(element);
  const Triangle& tri = mesh.triangle(element);
  const double h = mesh.diameter(element);
  const Eigen::Vector3d nodal(vertex_values[tri[0]], vertex_values[tri[1]], vertex_values[tri[2]]);
  const double volume = degree4_rule<double>().integrate(c, mesh.area(element), [&](const Point2& x, const auto& b) {
    const double r = (potential.value(x) - e_psi) * b.dot(nodal);
    return r * r;
  });
  double jump = 0.0;
  for (int k = 0; k < 3; ++k) {
    const double j = normal_jump(mesh, vertex_values, element, k);
    jump += (c[(k + 2) % 3] - c[(k + 1) % 3]).norm() * j * j;
  }
  return h * h * volume + 0.5 * h * jump;
}

EstimatorReport global_bound(const Discretization& disc, const Potential& potential, const Vector& psi,
                             double c_interp) {
  EstimatorReport report;
  report.c_interp = c_interp;
  report.e_psi = 1.0 / apply_g(*disc.solver, disc.m, psi).dot(disc.m * psi);
  const Mesh& mesh = disc.space->mesh();
  const Vector values = disc.space->to_vertex_values(psi);
  report.per_element.resize(mesh.n_triangles());
  for (int t = 0; t < mesh.n_triangles(); ++t)
    report.per_element[t] = element_eta_sq(mesh, values, report.e_psi, potential, t);
  report.total_bound =
      c_interp * std::sqrt(std::accumulate(report.per_element.begin(), report.per_element.end(), 0.0));
  return report;
}

}  // namespace gflow
