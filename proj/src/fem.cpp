#include "gflow/fem.hpp"

#include <cmath>
#include <sstream>

#include "gflow/errors.hpp"
#include "gflow/quadrature.hpp"

namespace gflow {

FeSpace::FeSpace(std::shared_ptr<const Mesh> mesh) : mesh_(std::move(mesh)) {
  dof_of_vertex_.assign(mesh_->n_vertices(), kNoDof);
  for (int v = 0; v < mesh_->n_vertices(); ++v) {
    if (mesh_->boundary_vertex(v)) continue;
    dof_of_vertex_[v] = static_cast<int>(vertex_of_dof_.size());
    vertex_of_dof_.push_back(v);
  }
}

Vector FeSpace::to_vertex_values(const Vector& coeffs) const {
  Vector values = Vector::Zero(mesh_->n_vertices());
  for (int d = 0; d < n_dofs(); ++d) values[vertex_of_dof_[d]] = coeffs[d];
  return values;
}

Vector FeSpace::from_vertex_values(const Vector& values) const {
  Vector coeffs(n_dofs());
  for (int d = 0; d < n_dofs(); ++d) coeffs[d] = values[vertex_of_dof_[d]];
  return coeffs;
}

Potential zero_potential() {
  Potential p;
  p.value = [](const Point2&) { return 0.0; };
  p.zero = true;
  return p;
}

Potential constant_potential(double c) {
  Potential p;
  p.value = [c](const Point2&) { return c; };
  p.element_moments = [c](const std::array<Point2, 3>& t) {
    return local_mass<double>(0.5 * orient(t[0], t[1], t[2])) * c;
  };
  p.zero = c == 0.0;
  return p;
}

Eigen::Matrix<double, 2, 3> barycentric_gradients(const std::array<Point2, 3>& c) {
  const double twice_area = orient(c[0], c[1], c[2]);
  Eigen::Matrix<double, 2, 3> grad;
  for (int k = 0; k < 3; ++k) {
    const Point2& p = c[(k + 1) % 3];
    const Point2& q = c[(k + 2) % 3];
    grad(0, k) = (p.y() - q.y()) / twice_area;
    grad(1, k) = (q.x() - p.x()) / twice_area;
  }
  return grad;
}

Eigen::Matrix3d local_potential_mass(const Potential& potential, const std::array<Point2, 3>& c) {
  if (potential.zero) return Eigen::Matrix3d::Zero();
  if (potential.element_moments) return potential.element_moments(c);
  const auto& rule = degree4_rule<double>();
  const double area = 0.5 * orient(c[0], c[1], c[2]);
  Eigen::Matrix3d m = Eigen::Matrix3d::Zero();
  for (int q = 0; q < rule.size(); ++q) {
    const Point2 x = rule.map(c, q);
    const double v = potential.value(x);
    if (!std::isfinite(v) || v < 0.0) {
      std::ostringstream msg;
      msg << "potential value " << v << " at (" << x.x() << ", " << x.y() << ")";
      throw InvalidPotential(msg.str());
    }
    const Eigen::Vector3d& lam = rule.points[q];
    m.noalias() += (rule.weights[q] * area * v) * (lam * lam.transpose());
  }
  return m;
}

Eigen::Matrix3d local_h_matrix(const Potential& potential, const std::array<Point2, 3>& c) {
  return local_stiffness<double>(c) + local_potential_mass(potential, c);
}

namespace {

template <typename Local>
SparseSymMatrix assemble(const Mesh& mesh, const std::vector<int>& index, int n, Local&& local) {
  std::vector<Eigen::Triplet<double>> entries;
  entries.reserve(static_cast<std::size_t>(mesh.n_triangles()) * 9);
  for (int t = 0; t < mesh.n_triangles(); ++t) {
    const Eigen::Matrix3d k = local(t);
    const Triangle& tri = mesh.triangle(t);
    for (int a = 0; a < 3; ++a) {
      const int i = index[tri[a]];
      if (i < 0) continue;
      for (int b = 0; b < 3; ++b) {
        const int j = index[tri[b]];
        if (j < 0) continue;
        // Symmetrize the element contribution so A(i,j) and A(j,i) see the same sums.
        entries.emplace_back(i, j, a <= b ? k(a, b) : k(b, a));
      }
    }
  }
  SparseSymMatrix m(n, n);
  m.setFromTriplets(entries.begin(), entries.end());
  m.makeCompressed();
  return m;
}

std::vector<int> identity_index(const Mesh& mesh) {
  std::vector<int> index(mesh.n_vertices());
  for (int v = 0; v < mesh.n_vertices(); ++v) index[v] = v;
  return index;
}

}  // namespace

SparseSymMatrix assemble_h_matrix(const FeSpace& space, const Potential& potential) {
  const Mesh& mesh = space.mesh();
  return assemble(mesh, space.dof_map(), space.n_dofs(),
                  [&](int t) { return local_h_matrix(potential, mesh.corners(t)); });
}

SparseSymMatrix assemble_mass_matrix(const FeSpace& space) {
  const Mesh& mesh = space.mesh();
  return assemble(mesh, space.dof_map(), space.n_dofs(),
                  [&](int t) { return local_mass<double>(mesh.area(t)); });
}

SparseSymMatrix assemble_full_h_matrix(const Mesh& mesh, const Potential& potential) {
  return assemble(mesh, identity_index(mesh), mesh.n_vertices(),
                  [&](int t) { return local_h_matrix(potential, mesh.corners(t)); });
}

SparseSymMatrix assemble_full_mass_matrix(const Mesh& mesh) {
  return assemble(mesh, identity_index(mesh), mesh.n_vertices(),
                  [&](int t) { return local_mass<double>(mesh.area(t)); });
}

Vector interpolate(const FeSpace& space, const std::function<double(const Point2&)>& f) {
  Vector coeffs(space.n_dofs());
  for (int d = 0; d < space.n_dofs(); ++d) {
    const Point2& p = space.mesh().vertex(space.vertex_of_dof(d));
    coeffs[d] = f(p);
    if (!std::isfinite(coeffs[d])) {
      std::ostringstream msg;
      msg << "non-finite value at (" << p.x() << ", " << p.y() << ")";
      throw InvalidFunction(msg.str());
    }
  }
  return coeffs;
}

Vector prolongate_vertex_values(const Vector& values, const RefinementMap& map) {
  if (values.size() != map.old_vertex_count) throw InvalidMap("value vector does not match the coarse mesh");
  Vector out(map.old_vertex_count + static_cast<Eigen::Index>(map.new_vertex_parents.size()));
  out.head(map.old_vertex_count) = values;
  for (std::size_t k = 0; k < map.new_vertex_parents.size(); ++k) {
    const auto [a, b] = map.new_vertex_parents[k];
    out[map.old_vertex_count + static_cast<Eigen::Index>(k)] = 0.5 * (out[a] + out[b]);
  }
  return out;
}

Vector prolongate(const Vector& coeffs, const FeSpace& old_space, const FeSpace& new_space,
                  const RefinementMap& map) {
  if (old_space.mesh().n_vertices() != map.old_vertex_count ||
      old_space.mesh().n_triangles() != map.old_triangle_count ||
      new_space.mesh().n_vertices() !=
          map.old_vertex_count + static_cast<int>(map.new_vertex_parents.size()) ||
      coeffs.size() != old_space.n_dofs()) {
    throw InvalidMap("refinement map does not connect the given spaces");
  }
  return new_space.from_vertex_values(prolongate_vertex_values(old_space.to_vertex_values(coeffs), map));
}

}  // namespace gflow
