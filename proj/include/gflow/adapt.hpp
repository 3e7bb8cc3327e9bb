#ifndef GFLOW_ADAPT_HPP
#define GFLOW_ADAPT_HPP

#include <memory>
#include <vector>

#include <Eigen/Core>

#include "gflow/fem.hpp"
#include "gflow/flow.hpp"
#include "gflow/mesh.hpp"

namespace gflow {

/// Everything the indicator sweep reads; built once per sweep and shared by
/// all workers.
struct IndicatorInput {
  std::shared_ptr<const FeSpace> space;
  Potential potential;
  /// The iterate as per-vertex values.
  Vector psi_values;
  /// E(psi) on the whole domain.
  double psi_energy = 0.0;
};

IndicatorInput make_indicator_input(const Discretization& disc, const Potential& potential, const Vector& psi);

/// The hats of the patch's interior nodes followed by the iterate psi.
struct LocalSpace {
  VirtualPatch patch;
  int n_hats = 0;
  /// H and L2 Gram matrices; psi is the last index.
  Eigen::MatrixXd h_local;
  Eigen::MatrixXd m_local;

  int psi_index() const { return n_hats; }
};

/// Throws EmptyLocalSpace when the patch has no interior node.
LocalSpace build_local_space(const IndicatorInput& input, int element);

struct LocalStep {
  double energy_before = 0.0;
  double energy_after = 0.0;
  /// max(0, before - after)
  double decrease = 0.0;
};

/// One unit time step of the flow in the local space, then L2 normalization.
/// The orthogonality constraints are not imposed locally: psi already
/// satisfies them, and a patch has too few hats to carry several of them.
/// Throws SolverFailure when the local Gram matrices are not definite.
LocalStep local_gfi_step(const LocalSpace& local);

/// The energy decrease of local_gfi_step; 0 for empty patches and failed
/// local solves.
double local_indicator(const IndicatorInput& input, int element);

struct IndicatorField {
  std::vector<double> values;
  /// Elements whose local solve failed (indicator set to 0).
  int failures = 0;

  double total() const;
};

/// Runs the sweep on `threads` workers (0 = hardware concurrency). The result
/// does not depend on the thread count.
IndicatorField compute_indicators(const IndicatorInput& input, int threads = 1);

/// Smallest set of largest indicators (ties by index) holding at least
/// theta of the total; {0} when the total vanishes.
std::vector<int> dorfler_mark(const std::vector<double>& values, double theta);

}  // namespace gflow

#endif  // GFLOW_ADAPT_HPP
