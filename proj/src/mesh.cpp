#include "gflow/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <unordered_map>

#include "gflow/errors.hpp"

namespace gflow {

namespace {

std::uint64_t edge_key(int a, int b) {
  if (a > b) std::swap(a, b);
  return (static_cast<std::uint64_t>(a) << 32) | static_cast<std::uint32_t>(b);
}

int longest_edge(const std::array<Point2, 3>& c) {
  int best = 0;
  double best_len = -1.0;
  for (int k = 0; k < 3; ++k) {
    const double len = (c[(k + 1) % 3] - c[(k + 2) % 3]).squaredNorm();
    if (len > best_len) {
      best_len = len;
      best = k;
    }
  }
  return best;
}

}  // namespace

DomainId parse_domain(std::string_view name) {
  if (name == "unit_square") return DomainId::unit_square;
  if (name == "square_0_2pi") return DomainId::square_0_2pi;
  if (name == "lshape") return DomainId::lshape;
  if (name == "centered_square") return DomainId::centered_square;
  throw UnknownDomain("unknown domain '" + std::string(name) + "'");
}

std::string_view to_string(DomainId domain) {
  switch (domain) {
    case DomainId::unit_square: return "unit_square";
    case DomainId::square_0_2pi: return "square_0_2pi";
    case DomainId::lshape: return "lshape";
    case DomainId::centered_square: return "centered_square";
  }
  return "?";
}

Mesh::Mesh(std::vector<Point2> vertices, std::vector<Triangle> triangles,
           std::vector<int> refinement_edge, std::vector<int> generation)
    : vertices_(std::move(vertices)),
      triangles_(std::move(triangles)),
      refinement_edge_(std::move(refinement_edge)),
      generation_(std::move(generation)) {
  const auto nt = triangles_.size();
  for (std::size_t t = 0; t < nt; ++t) {
    for (int v : triangles_[t]) {
      if (v < 0 || v >= n_vertices()) throw InternalError("triangle references missing vertex");
    }
    const auto c = corners(static_cast<int>(t));
    if (!(orient(c[0], c[1], c[2]) > 0.0)) {
      throw InternalError("triangle " + std::to_string(t) + " is not counterclockwise");
    }
  }
  if (refinement_edge_.empty()) {
    refinement_edge_.resize(nt);
    for (std::size_t t = 0; t < nt; ++t) refinement_edge_[t] = longest_edge(corners(static_cast<int>(t)));
  }
  if (generation_.empty()) generation_.assign(nt, 0);
  if (refinement_edge_.size() != nt || generation_.size() != nt) {
    throw InternalError("per-triangle arrays have inconsistent sizes");
  }

  neighbors_.assign(nt, Triangle{kBoundary, kBoundary, kBoundary});
  std::unordered_map<std::uint64_t, std::pair<int, int>> open;
  open.reserve(nt * 2);
  for (std::size_t t = 0; t < nt; ++t) {
    const auto& tri = triangles_[t];
    for (int k = 0; k < 3; ++k) {
      const auto key = edge_key(tri[(k + 1) % 3], tri[(k + 2) % 3]);
      auto [it, inserted] = open.try_emplace(key, static_cast<int>(t), k);
      if (inserted) continue;
      auto [other, ok] = it->second;
      if (other < 0) throw InternalError("edge shared by more than two triangles");
      neighbors_[t][k] = other;
      neighbors_[other][ok] = static_cast<int>(t);
      it->second = {-1, -1};
    }
  }
  boundary_vertex_.assign(vertices_.size(), 0);
  for (std::size_t t = 0; t < nt; ++t) {
    for (int k = 0; k < 3; ++k) {
      if (neighbors_[t][k] != kBoundary) continue;
      boundary_vertex_[triangles_[t][(k + 1) % 3]] = 1;
      boundary_vertex_[triangles_[t][(k + 2) % 3]] = 1;
    }
  }
}

std::array<Point2, 3> Mesh::corners(int t) const {
  const auto& tri = triangles_[t];
  return {vertices_[tri[0]], vertices_[tri[1]], vertices_[tri[2]]};
}

double Mesh::area(int t) const {
  const auto c = corners(t);
  return 0.5 * orient(c[0], c[1], c[2]);
}

double Mesh::diameter(int t) const {
  const auto c = corners(t);
  return std::max({(c[0] - c[1]).norm(), (c[1] - c[2]).norm(), (c[2] - c[0]).norm()});
}

Eigen::Vector3d barycentric(const std::array<Point2, 3>& tri, const Point2& p) {
  const double total = orient(tri[0], tri[1], tri[2]);
  return {orient(p, tri[1], tri[2]) / total, orient(tri[0], p, tri[2]) / total,
          orient(tri[0], tri[1], p) / total};
}

Mesh generate_initial(DomainId domain, int n) {
  if (n < 1) throw InternalError("generate_initial needs n >= 1");
  double x0 = 0.0, y0 = 0.0, side = 1.0;
  int cells = n;
  switch (domain) {
    case DomainId::unit_square: break;
    case DomainId::square_0_2pi: side = 2.0 * std::numbers::pi; break;
    case DomainId::lshape: side = 2.0; cells = 2 * n; break;
    case DomainId::centered_square: x0 = y0 = -0.5; break;
  }
  auto keep = [&](int i, int j) {
    return domain != DomainId::lshape || !(i >= n && j < n);
  };

  const int stride = cells + 1;
  std::vector<int> index(static_cast<std::size_t>(stride) * stride, -1);
  for (int j = 0; j < cells; ++j) {
    for (int i = 0; i < cells; ++i) {
      if (!keep(i, j)) continue;
      for (int dj = 0; dj < 2; ++dj)
        for (int di = 0; di < 2; ++di) index[(j + dj) * stride + i + di] = 0;
    }
  }
  std::vector<Point2> vertices;
  for (int j = 0; j <= cells; ++j) {
    for (int i = 0; i <= cells; ++i) {
      auto& slot = index[j * stride + i];
      if (slot < 0) continue;
      slot = static_cast<int>(vertices.size());
      vertices.emplace_back(x0 + side * i / cells, y0 + side * j / cells);
    }
  }
  std::vector<Triangle> triangles;
  for (int j = 0; j < cells; ++j) {
    for (int i = 0; i < cells; ++i) {
      if (!keep(i, j)) continue;
      const int a = index[j * stride + i], b = index[j * stride + i + 1];
      const int c = index[(j + 1) * stride + i + 1], d = index[(j + 1) * stride + i];
      triangles.push_back({a, b, c});
      triangles.push_back({a, c, d});
    }
  }
  return Mesh(std::move(vertices), std::move(triangles));
}

std::vector<int> facewise_neighbors(const Mesh& mesh, int element) {
  std::vector<int> out;
  for (int nb : mesh.neighbors().at(element)) {
    if (nb != kBoundary) out.push_back(nb);
  }
  return out;
}

int locate_point(const Mesh& mesh, const Point2& p) {
  for (int t = 0; t < mesh.n_triangles(); ++t) {
    if (barycentric(mesh.corners(t), p).minCoeff() >= -kLocateTolerance) return t;
  }
  std::ostringstream msg;
  msg << "point (" << p.x() << ", " << p.y() << ") lies outside the mesh";
  throw OutOfDomain(msg.str());
}

std::optional<std::string> conformity_violation(const Mesh& mesh) {
  const auto& tris = mesh.triangles();
  const auto& nbs = mesh.neighbors();
  for (int t = 0; t < mesh.n_triangles(); ++t) {
    if (!(mesh.area(t) > 0.0)) return "triangle " + std::to_string(t) + " has non-positive area";
    for (int k = 0; k < 3; ++k) {
      const int nb = nbs[t][k];
      if (nb == kBoundary) continue;
      const auto key = edge_key(tris[t][(k + 1) % 3], tris[t][(k + 2) % 3]);
      bool found = false;
      for (int j = 0; j < 3; ++j) {
        if (nbs[nb][j] == t && edge_key(tris[nb][(j + 1) % 3], tris[nb][(j + 2) % 3]) == key) found = true;
      }
      if (!found) return "neighbour table asymmetric at triangle " + std::to_string(t);
    }
  }
  // A hanging node is a vertex on the closed hull of a triangle it does not belong to.
  PointLocator locator(std::shared_ptr<const Mesh>(&mesh, [](const Mesh*) {}));
  for (int v = 0; v < mesh.n_vertices(); ++v) {
    const Point2& p = mesh.vertex(v);
    for (int t : locator.candidates(p, p)) {
      const auto& tri = tris[t];
      if (tri[0] == v || tri[1] == v || tri[2] == v) continue;
      if (barycentric(mesh.corners(t), p).minCoeff() >= -kLocateTolerance) {
        return "vertex " + std::to_string(v) + " hangs on triangle " + std::to_string(t);
      }
    }
  }
  return std::nullopt;
}

double min_angle(const Mesh& mesh) {
  double result = std::numbers::pi;
  for (int t = 0; t < mesh.n_triangles(); ++t) {
    const auto c = mesh.corners(t);
    for (int k = 0; k < 3; ++k) {
      const Point2 u = c[(k + 1) % 3] - c[k];
      const Point2 w = c[(k + 2) % 3] - c[k];
      const double cosine = std::clamp(u.dot(w) / (u.norm() * w.norm()), -1.0, 1.0);
      result = std::min(result, std::acos(cosine));
    }
  }
  return result;
}

}  // namespace gflow
