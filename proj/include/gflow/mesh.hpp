#ifndef GFLOW_MESH_HPP
#define GFLOW_MESH_HPP

#include <array>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

namespace gflow {

using Point2 = Eigen::Vector2d;
using Triangle = std::array<int, 3>;

/// Neighbor entry for an edge on the domain boundary.
inline constexpr int kBoundary = -1;

enum class DomainId { unit_square, square_0_2pi, lshape, centered_square };

DomainId parse_domain(std::string_view name);
std::string_view to_string(DomainId domain);

/// Conforming triangulation of a planar polygonal domain.
///
/// Triangles are stored counterclockwise. `neighbors()[t][k]` is the triangle
/// across the edge opposite local vertex k, or kBoundary. The refinement edge
/// of triangle t is the edge opposite local vertex `refinement_edge()[t]`.
/// A Mesh is immutable once built.
class Mesh {
 public:
  Mesh() = default;

  /// Builds adjacency and boundary flags from raw topology. An empty
  /// `refinement_edge` selects the longest edge of every triangle; an empty
  /// `generation` sets all generations to 0. Throws InternalError on
  /// non-positive area or on an edge shared by more than two triangles.
  Mesh(std::vector<Point2> vertices, std::vector<Triangle> triangles,
       std::vector<int> refinement_edge = {}, std::vector<int> generation = {});

  int n_vertices() const { return static_cast<int>(vertices_.size()); }
  int n_triangles() const { return static_cast<int>(triangles_.size()); }

  const std::vector<Point2>& vertices() const { return vertices_; }
  const std::vector<Triangle>& triangles() const { return triangles_; }
  const std::vector<Triangle>& neighbors() const { return neighbors_; }
  const std::vector<int>& refinement_edge() const { return refinement_edge_; }
  const std::vector<int>& generation() const { return generation_; }

  const Point2& vertex(int v) const { return vertices_[v]; }
  const Triangle& triangle(int t) const { return triangles_[t]; }
  bool boundary_vertex(int v) const { return boundary_vertex_[v] != 0; }

  std::array<Point2, 3> corners(int t) const;
  double area(int t) const;
  /// Longest edge length.
  double diameter(int t) const;

 private:
  std::vector<Point2> vertices_;
  std::vector<Triangle> triangles_;
  std::vector<Triangle> neighbors_;
  std::vector<char> boundary_vertex_;
  std::vector<int> refinement_edge_;
  std::vector<int> generation_;
};

/// Twice the signed area of (a, b, c).
inline double orient(const Point2& a, const Point2& b, const Point2& c) {
  return (b.x() - a.x()) * (c.y() - a.y()) - (b.y() - a.y()) * (c.x() - a.x());
}

/// Barycentric coordinates of p with respect to the triangle.
Eigen::Vector3d barycentric(const std::array<Point2, 3>& tri, const Point2& p);

/// Structured uniform mesh: every square cell is split along its
/// lower-left to upper-right diagonal. `n` counts cells per unit length for
/// unit_square, lshape and centered_square, and cells per side for
/// square_0_2pi.
Mesh generate_initial(DomainId domain, int n);

/// Triangles sharing a full edge with `element`, in local-edge order.
std::vector<int> facewise_neighbors(const Mesh& mesh, int element);

// ---------------------------------------------------------------------------
// Virtual red-green patches

enum class NodeOrigin { element_vertex, edge_midpoint, neighbor_vertex };

/// Red refinement of an element plus green closure of its facewise
/// neighbours. Built on the side; never touches the mesh.
struct VirtualPatch {
  int parent_element = -1;
  std::vector<Point2> nodes;
  std::vector<NodeOrigin> node_origin;
  /// Mesh vertex behind each node, or -1 for an edge midpoint.
  std::vector<int> node_vertex;
  /// For midpoint nodes, the mesh vertices spanning the bisected edge.
  std::vector<std::array<int, 2>> node_edge;
  std::vector<Triangle> elements;
  /// Mesh triangle containing each small element.
  std::vector<int> host;
  /// Nodes carrying a hat function of the local space (indices into nodes).
  std::vector<int> interior_nodes;

  Point2 interior_node(int k) const { return nodes[interior_nodes[k]]; }
};

VirtualPatch build_virtual_patch(const Mesh& mesh, int element);

// ---------------------------------------------------------------------------
// Refinement

/// Lineage of one refinement call. Vertices below `old_vertex_count` keep
/// their index; new vertex `old_vertex_count + k` is the midpoint of
/// `new_vertex_parents[k]`, listed in creation order so that parents are
/// always older than children.
struct RefinementMap {
  int old_vertex_count = 0;
  int old_triangle_count = 0;
  std::vector<std::array<int, 2>> new_vertex_parents;
  /// children[t] lists the new triangles covering old triangle t; an
  /// untouched triangle maps to itself only.
  std::vector<std::vector<int>> children;
};

struct RefinementResult {
  Mesh mesh;
  RefinementMap map;
};

/// Newest-vertex bisection of every marked triangle with recursive
/// conformity closure. Each marked triangle is bisected at least once.
RefinementResult refine(const Mesh& mesh, std::span<const int> marked);

// ---------------------------------------------------------------------------
// Point location

inline constexpr double kLocateTolerance = 1e-12;

/// Brute-force scan: lowest-index triangle whose closed hull contains p.
/// Throws OutOfDomain.
int locate_point(const Mesh& mesh, const Point2& p);

/// Quadtree over triangle bounding boxes. Same semantics as locate_point.
class PointLocator {
 public:
  explicit PointLocator(std::shared_ptr<const Mesh> mesh);

  int locate(const Point2& p) const;
  /// Triangles whose bounding box meets the query box, ascending.
  std::vector<int> candidates(const Point2& lo, const Point2& hi) const;
  const Mesh& mesh() const { return *mesh_; }

 private:
  struct Node {
    Point2 lo, hi;
    int child = -1;  // index of the first of four children, or -1 for a leaf
    std::vector<int> items;
  };
  void insert(int node, int tri, const Point2& lo, const Point2& hi, int depth);
  void split(int node, int depth);
  void collect(int node, const Point2& lo, const Point2& hi, std::vector<int>& out) const;

  std::shared_ptr<const Mesh> mesh_;
  std::vector<Node> nodes_;
  std::vector<std::array<Point2, 2>> boxes_;
};

// ---------------------------------------------------------------------------
// Diagnostics

/// Describes the first conformity or orientation violation, if any: hanging
/// nodes, non-positive areas, asymmetric neighbour tables.
std::optional<std::string> conformity_violation(const Mesh& mesh);

/// Smallest interior angle over all triangles (radians).
double min_angle(const Mesh& mesh);

}  // namespace gflow

#endif  // GFLOW_MESH_HPP
