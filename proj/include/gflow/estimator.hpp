#ifndef GFLOW_ESTIMATOR_HPP
#define GFLOW_ESTIMATOR_HPP

#include <vector>

#include "gflow/fem.hpp"
#include "gflow/flow.hpp"
#include "gflow/mesh.hpp"

namespace gflow {

/// Residual estimator eta_K^2 = h_K^2 |(V - e_psi) psi|^2_K + h_K/2 |[grad psi]|^2_{dK \ boundary}.
struct EstimatorReport {
  std::vector<double> per_element;
  /// c_interp * sqrt(sum per_element)
  double total_bound = 0.0;
  double c_interp = 1.0;
  double e_psi = 0.0;
};

/// Normal-gradient jump of the P1 function `vertex_values` across the edge
/// opposite local vertex k of `element`, times the outward normal of that
/// element; 0 on boundary edges.
double normal_jump(const Mesh& mesh, const Vector& vertex_values, int element, int k);

double element_eta_sq(const Mesh& mesh, const Vector& vertex_values, double e_psi, const Potential& potential,
                      int element);

/// e_psi = 1 / (G(psi), psi)_L2, then the element sweep.
EstimatorReport global_bound(const Discretization& disc, const Potential& potential, const Vector& psi,
                             double c_interp = 1.0);

}  // namespace gflow

#endif  // GFLOW_ESTIMATOR_HPP
