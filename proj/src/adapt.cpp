#include "gflow/adapt.hpp"

#include <algorithm>
#include <exception>
#include <mutex>
#include <numeric>
#include <thread>

#include <Eigen/Dense>

#include "gflow/errors.hpp"

namespace gflow {

IndicatorInput make_indicator_input(const Discretization& disc, const Potential& potential, const Vector& psi) {
  IndicatorInput in;
  in.space = disc.space;
  in.potential = potential;
  in.psi_values = disc.space->to_vertex_values(psi);
  in.psi_energy = energy(disc.a, psi);
  return in;
}

namespace {

// Values of a mesh P1 function at the patch nodes.
Vector node_values(const VirtualPatch& patch, const Vector& vertex_values) {
  Vector out(static_cast<Eigen::Index>(patch.nodes.size()));
  for (std::size_t k = 0; k < patch.nodes.size(); ++k) {
    out[k] = patch.node_vertex[k] >= 0
                 ? vertex_values[patch.node_vertex[k]]
                 : 0.5 * (vertex_values[patch.node_edge[k][0]] + vertex_values[patch.node_edge[k][1]]);
  }
  return out;
}

}  // namespace

LocalSpace build_local_space(const IndicatorInput& input, int element) {
  const Mesh& mesh = input.space->mesh();
  LocalSpace local;
  local.patch = build_virtual_patch(mesh, element);
  const VirtualPatch& patch = local.patch;
  local.n_hats = static_cast<int>(patch.interior_nodes.size());
  if (local.n_hats == 0) throw EmptyLocalSpace("patch has no interior node");
  const int n = local.n_hats + 1;

  // Coefficients of every basis function at the patch nodes.
  const int n_nodes = static_cast<int>(patch.nodes.size());
  Eigen::MatrixXd basis = Eigen::MatrixXd::Zero(n_nodes, n);
  for (int j = 0; j < local.n_hats; ++j) basis(patch.interior_nodes[j], j) = 1.0;
  basis.col(local.n_hats) = node_values(patch, input.psi_values);

  local.h_local = Eigen::MatrixXd::Zero(n, n);
  local.m_local = Eigen::MatrixXd::Zero(n, n);
  for (const Triangle& e : patch.elements) {
    const std::array<Point2, 3> c{patch.nodes[e[0]], patch.nodes[e[1]], patch.nodes[e[2]]};
    const Eigen::Matrix3d kh = local_h_matrix(input.potential, c);
    const Eigen::Matrix3d km = local_mass<double>(0.5 * orient(c[0], c[1], c[2]));
    Eigen::Matrix<double, 3, Eigen::Dynamic> b(3, n);
    for (int a = 0; a < 3; ++a) b.row(a) = basis.row(e[a]);
    local.h_local.noalias() += b.transpose() * kh * b;
    local.m_local.noalias() += b.transpose() * km * b;
  }
  // psi extends beyond the patch; its own products come from the whole domain.
  local.h_local(n - 1, n - 1) = 2.0 * input.psi_energy;
  local.m_local(n - 1, n - 1) = 1.0;
  return local;
}

LocalStep local_gfi_step(const LocalSpace& local) {
  const int n = local.n_hats + 1;
  const Eigen::LLT<Eigen::MatrixXd> h(local.h_local);
  if (h.info() != Eigen::Success) throw SolverFailure("local H matrix is not definite");
  const Eigen::LLT<Eigen::MatrixXd> m(local.m_local);
  if (m.info() != Eigen::Success) throw SolverFailure("local mass matrix is not definite");

  LocalStep step;
  Eigen::VectorXd e_psi = Eigen::VectorXd::Unit(n, local.psi_index());
  step.energy_before = 0.5 * local.h_local(n - 1, n - 1);

  // Unit time step: the new function is G(psi) up to scaling.
  Eigen::VectorXd c = h.solve(local.m_local * e_psi);
  const double norm_sq = c.dot(local.m_local * c);
  if (!(norm_sq > 0.0)) throw SolverFailure("local step vanished");
  c /= std::sqrt(norm_sq);
  step.energy_after = 0.5 * c.dot(local.h_local * c);
  step.decrease = std::max(0.0, step.energy_before - step.energy_after);
  return step;
}

double local_indicator(const IndicatorInput& input, int element) {
  try {
    return local_gfi_step(build_local_space(input, element)).decrease;
  } catch (const EmptyLocalSpace&) {
    return 0.0;
  }
}

double IndicatorField::total() const { return std::accumulate(values.begin(), values.end(), 0.0); }

IndicatorField compute_indicators(const IndicatorInput& input, int threads) {
  const int n = input.space->mesh().n_triangles();
  IndicatorField field;
  field.values.assign(n, 0.0);
  std::vector<char> failed(n, 0);
  std::exception_ptr error;
  std::mutex error_mutex;
  auto work = [&](int begin, int end) {
    try {
      for (int t = begin; t < end; ++t) {
        try {
          field.values[t] = local_indicator(input, t);
        } catch (const SolverFailure&) {
          field.values[t] = 0.0;
          failed[t] = 1;
        }
      }
    } catch (...) {
      const std::lock_guard<std::mutex> lock(error_mutex);
      if (!error) error = std::current_exception();
    }
  };
  if (threads <= 0) threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  threads = std::min(threads, std::max(1, n / 64));
  if (threads <= 1) {
    work(0, n);
  } else {
    std::vector<std::thread> pool;
    const int chunk = (n + threads - 1) / threads;
    for (int k = 0; k < threads; ++k) pool.emplace_back(work, k * chunk, std::min(n, (k + 1) * chunk));
    for (auto& th : pool) th.join();
  }
  if (error) std::rethrow_exception(error);
  field.failures = static_cast<int>(std::count(failed.begin(), failed.end(), 1));
  return field;
}

std::vector<int> dorfler_mark(const std::vector<double>& values, double theta) {
  std::vector<int> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return values[a] > values[b]; });
  double total = 0.0;
  for (int t : order) total += values[t];
  if (!(total > 0.0)) return {0};
  std::vector<int> marked;
  double sum = 0.0;
  for (int t : order) {
    marked.push_back(t);
    sum += values[t];
    if (sum >= theta * total) break;
  }
  return marked;
}

}  // namespace gflow
