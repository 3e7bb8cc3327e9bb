#include "gflow/flow.hpp"

#include <cmath>
#include <stdexcept>

#include "gflow/errors.hpp"
#include "gflow/quadrature.hpp"

namespace gflow {

double Donor::evaluate(const Point2& p) const {
  const Mesh& mesh = space->mesh();
  const int t = locator->locate(p);
  const Eigen::Vector3d w = barycentric(mesh.corners(t), p);
  const Triangle& tri = mesh.triangle(t);
  return w[0] * values[tri[0]] + w[1] * values[tri[1]] + w[2] * values[tri[2]];
}

Donor make_donor(std::shared_ptr<const FeSpace> space, Vector coeffs, double eigenvalue) {
  if (coeffs.size() != space->n_dofs()) throw InvalidMap("donor coefficients do not match the space");
  Donor d;
  d.values = space->to_vertex_values(coeffs);
  d.coeffs = std::move(coeffs);
  d.eigenvalue = eigenvalue;
  d.locator = std::make_shared<const PointLocator>(space->mesh_ptr());
  d.space = std::move(space);
  return d;
}

Donor make_donor(const WaveFunction& psi, double eigenvalue) { return make_donor(psi.space, psi.coeffs, eigenvalue); }

void GfiParams::validate() const {
  if (!(tau_max > 0.0 && tau_max <= 1.0)) throw std::invalid_argument("tau_max must lie in (0, 1]");
  if (backtrack_cap < 0) throw std::invalid_argument("backtrack_cap must be nonnegative");
  if (!(gamma_stop > 0.0 && gamma_stop < 1.0)) throw std::invalid_argument("gamma must lie in (0, 1)");
  if (!(theta > 0.0 && theta < 1.0)) throw std::invalid_argument("theta must lie in (0, 1)");
  if (!(solver_tol > 0.0 && solver_tol <= 1e-6)) throw std::invalid_argument("solver_tol must lie in (0, 1e-6]");
}

Discretization discretize(std::shared_ptr<const FeSpace> space, const Potential& potential, double solver_tol) {
  Discretization d;
  d.a = assemble_h_matrix(*space, potential);
  d.m = assemble_mass_matrix(*space);
  d.solver = std::make_shared<const SpdSolver>(d.a, solver_tol);
  d.space = std::move(space);
  return d;
}

Vector apply_g(const SpdSolver& solver, const SparseSymMatrix& m, const Vector& u) { return solver.solve(m * u); }

Vector apply_g(const SparseSymMatrix& a, const SparseSymMatrix& m, const Vector& u, double rel_tol) {
  return SpdSolver(a, rel_tol).solve(m * u);
}

double energy(const SparseSymMatrix& a, const Vector& u) { return 0.5 * u.dot(a * u); }

double eigenvalue_estimate(const SparseSymMatrix& a, const SparseSymMatrix&, const Vector& u) {
  return u.dot(a * u);
}

double l2_norm(const SparseSymMatrix& m, const Vector& u) { return std::sqrt(u.dot(m * u)); }

double max_constraint_violation(const ConstraintSet& constraints, const Vector& u) {
  double worst = 0.0;
  for (const Vector& w : constraints.weighted) worst = std::max(worst, std::abs(w.dot(u)));
  return worst;
}

Vector project_and_normalize(Vector psi_hat, const ConstraintSet& constraints, const SparseSymMatrix& m) {
  // Two sweeps: a single one leaves O(eps * cond) components behind.
  for (int sweep = 0; sweep < 2 && !constraints.empty(); ++sweep) {
    for (int i = 0; i < constraints.size(); ++i) {
      psi_hat -= constraints.weighted[i].dot(psi_hat) * constraints.representatives[i];
    }
  }
  const double norm = l2_norm(m, psi_hat);
  if (!(norm >= 1e-14)) throw DegenerateIterate("iterate lies in the span of the known states");
  psi_hat /= norm;
  Eigen::Index k = 0;
  psi_hat.cwiseAbs().maxCoeff(&k);
  if (psi_hat.size() > 0 && psi_hat[k] < 0.0) psi_hat = -psi_hat;
  return psi_hat;
}

Vector gfi_step(const Vector& u, const Vector& g, double tau, const Discretization& disc,
                const ConstraintSet& constraints) {
  if (!(tau > 0.0 && tau <= 1.0)) throw std::invalid_argument("time step must lie in (0, 1]");
  const double gmu = g.dot(disc.m * u);
  if (!(gmu > 0.0)) throw InternalError("(G psi, psi) is not positive");
  const Vector psi_hat = (1.0 - tau) * u + (tau / gmu) * g;
  return project_and_normalize(psi_hat, constraints, disc.m);
}

WaveFunction gfi_step(const WaveFunction& psi, double tau, const Discretization& disc,
                      const ConstraintSet& constraints) {
  const Vector g = apply_g(*disc.solver, disc.m, psi.coeffs);
  return {psi.space, gfi_step(psi.coeffs, g, tau, disc, constraints)};
}

StepResult select_time_step(const Vector& u, const Discretization& disc, const ConstraintSet& constraints,
                            const GfiParams& params) {
  const double e_old = energy(disc.a, u);
  const Vector g = apply_g(*disc.solver, disc.m, u);
  double tau = params.tau_max;
  for (int m = 0; m <= params.backtrack_cap; ++m, tau *= 0.5) {
    StepResult r;
    r.tau = tau;
    r.trials = m + 1;
    r.psi = gfi_step(u, g, tau, disc, constraints);
    r.energy = energy(disc.a, r.psi);
    if (r.energy < e_old) return r;
  }
  throw Stagnation("no time step lowers the energy");
}

// ---------------------------------------------------------------------------
// Cross-mesh integration

namespace {

struct Piece {
  std::array<Point2, 3> corners;
  int donor_element;
};

Point2 centroid(const std::array<Point2, 3>& c) { return (c[0] + c[1] + c[2]) / 3.0; }

double triangle_area(const std::array<Point2, 3>& c) { return 0.5 * orient(c[0], c[1], c[2]); }

// Splits target element t into triangles on which the donor is linear. Works
// when every donor element meeting t either contains t or lies inside it,
// which holds for meshes refined from a common coarse mesh by bisection.
bool overlay(const Mesh& target, int t, const Donor& donor, std::vector<Piece>& pieces) {
  pieces.clear();
  const Mesh& dm = donor.space->mesh();
  const auto k = target.corners(t);
  const int host = donor.locator->locate(centroid(k));
  const auto hc = dm.corners(host);
  bool inside = true;
  for (const Point2& p : k) inside = inside && barycentric(hc, p).minCoeff() >= -kLocateTolerance;
  if (inside) {
    pieces.push_back({k, host});
    return true;
  }
  Point2 lo = k[0].cwiseMin(k[1]).cwiseMin(k[2]);
  Point2 hi = k[0].cwiseMax(k[1]).cwiseMax(k[2]);
  const double area = target.area(t);
  double covered = 0.0;
  for (int d : donor.locator->candidates(lo, hi)) {
    const auto dc = dm.corners(d);
    if (barycentric(k, centroid(dc)).minCoeff() <= 1e-13) continue;
    for (const Point2& p : dc) {
      if (barycentric(k, p).minCoeff() < -kLocateTolerance) return false;
    }
    pieces.push_back({dc, d});
    covered += dm.area(d);
  }
  return std::abs(covered - area) <= 1e-10 * area;
}

// Donor values at the corners of a piece.
Eigen::Vector3d donor_values(const Donor& donor, const Piece& piece) {
  const Mesh& dm = donor.space->mesh();
  const auto hc = dm.corners(piece.donor_element);
  const Triangle& tri = dm.triangle(piece.donor_element);
  const Eigen::Vector3d vals(donor.values[tri[0]], donor.values[tri[1]], donor.values[tri[2]]);
  Eigen::Vector3d out;
  for (int i = 0; i < 3; ++i) {
    const Point2& p = piece.corners[i];
    int exact = -1;
    for (int j = 0; j < 3; ++j) exact = (p - hc[j]).norm() == 0.0 ? j : exact;
    out[i] = exact >= 0 ? vals[exact] : barycentric(hc, p).dot(vals);
  }
  return out;
}

// Integral of the product of two linear functions given by corner values.
double linear_product(double area, const Eigen::Vector3d& f, const Eigen::Vector3d& g) {
  return area / 12.0 * (f.dot(g) + f.sum() * g.sum());
}

}  // namespace

Vector load_vector(const Donor& donor, const FeSpace& target) {
  const Mesh& mesh = target.mesh();
  Vector b = Vector::Zero(target.n_dofs());
  std::vector<Piece> pieces;
  const auto& rule = degree4_rule<double>();
  for (int t = 0; t < mesh.n_triangles(); ++t) {
    const Triangle& tri = mesh.triangle(t);
    const auto k = mesh.corners(t);
    Eigen::Vector3d local = Eigen::Vector3d::Zero();
    if (overlay(mesh, t, donor, pieces)) {
      for (const Piece& piece : pieces) {
        const Eigen::Vector3d f = donor_values(donor, piece);
        Eigen::Matrix3d lam;  // lam(i, a) = lambda_a at piece corner i
        for (int i = 0; i < 3; ++i) lam.row(i) = barycentric(k, piece.corners[i]).transpose();
        const double area = triangle_area(piece.corners);
        for (int a = 0; a < 3; ++a) local[a] += linear_product(area, f, lam.col(a));
      }
    } else {
      const double area = mesh.area(t);
      for (int q = 0; q < rule.size(); ++q) {
        local += (rule.weights[q] * area * donor.evaluate(rule.map(k, q))) * rule.points[q];
      }
    }
    for (int a = 0; a < 3; ++a) {
      const int i = target.dof_of_vertex(tri[a]);
      if (i != kNoDof) b[i] += local[a];
    }
  }
  return b;
}

ConstraintSet project_constraints_to_space(std::vector<Donor> donors, const FeSpace& target,
                                           const SparseSymMatrix& m, double solver_tol) {
  ConstraintSet out;
  if (donors.empty()) {
    return out;
  }
  const SpdSolver solver(m, solver_tol);
  for (const Donor& donor : donors) {
    Vector x = solver.solve(load_vector(donor, target));
    for (int sweep = 0; sweep < 2; ++sweep) {
      for (std::size_t j = 0; j < out.representatives.size(); ++j) {
        x -= out.weighted[j].dot(x) * out.representatives[j];
      }
      if (sweep == 0) {
        const double norm = l2_norm(m, x);
        if (!(norm >= 1e-10)) throw DegenerateConstraint("projected constraint has negligible norm");
      }
    }
    x /= l2_norm(m, x);
    out.weighted.push_back(m * x);
    out.representatives.push_back(std::move(x));
  }
  out.donors = std::move(donors);
  return out;
}

double cross_inner_product(const Donor& a, const Donor& b) {
  const Mesh& mesh = b.space->mesh();
  const auto& rule = degree4_rule<double>();
  std::vector<Piece> pieces;
  double sum = 0.0;
  for (int t = 0; t < mesh.n_triangles(); ++t) {
    const Triangle& tri = mesh.triangle(t);
    const auto k = mesh.corners(t);
    const Eigen::Vector3d vb(b.values[tri[0]], b.values[tri[1]], b.values[tri[2]]);
    if (overlay(mesh, t, a, pieces)) {
      for (const Piece& piece : pieces) {
        Eigen::Vector3d g;
        for (int i = 0; i < 3; ++i) g[i] = barycentric(k, piece.corners[i]).dot(vb);
        sum += linear_product(triangle_area(piece.corners), donor_values(a, piece), g);
      }
    } else {
      const double area = mesh.area(t);
      for (int q = 0; q < rule.size(); ++q) {
        sum += rule.weights[q] * area * a.evaluate(rule.map(k, q)) * rule.points[q].dot(vb);
      }
    }
  }
  return sum;
}

}  // namespace gflow
