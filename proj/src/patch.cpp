#include "gflow/mesh.hpp"

namespace gflow {

VirtualPatch build_virtual_patch(const Mesh& mesh, int element) {
  VirtualPatch patch;
  patch.parent_element = element;
  const Triangle& tri = mesh.triangle(element);

  auto add_node = [&](const Point2& p, NodeOrigin origin, int vertex, std::array<int, 2> edge) {
    patch.nodes.push_back(p);
    patch.node_origin.push_back(origin);
    patch.node_vertex.push_back(vertex);
    patch.node_edge.push_back(edge);
    return static_cast<int>(patch.nodes.size()) - 1;
  };

  // Nodes 0..2: element vertices; 3..5: midpoint of the edge opposite vertex k.
  for (int k = 0; k < 3; ++k) add_node(mesh.vertex(tri[k]), NodeOrigin::element_vertex, tri[k], {-1, -1});
  for (int k = 0; k < 3; ++k) {
    const int b = tri[(k + 1) % 3], c = tri[(k + 2) % 3];
    add_node(0.5 * (mesh.vertex(b) + mesh.vertex(c)), NodeOrigin::edge_midpoint, -1, {b, c});
  }

  // Red refinement of the element.
  patch.elements.push_back({0, 5, 4});
  patch.elements.push_back({5, 1, 3});
  patch.elements.push_back({4, 3, 2});
  patch.elements.push_back({3, 4, 5});
  patch.host.assign(4, element);

  // Green closure: split each neighbour through the hanging midpoint.
  for (int k = 0; k < 3; ++k) {
    const int nb = mesh.neighbors()[element][k];
    if (nb == kBoundary) continue;
    patch.interior_nodes.push_back(3 + k);
    const Triangle& other = mesh.triangle(nb);
    int apex = 0;
    for (int j = 0; j < 3; ++j) {
      if (mesh.neighbors()[nb][j] == element) apex = j;
    }
    const int w = add_node(mesh.vertex(other[apex]), NodeOrigin::neighbor_vertex, other[apex], {-1, -1});
    // The shared edge runs other[apex+1] -> other[apex+2] in the neighbour's orientation.
    auto local = [&](int vertex) {
      for (int j = 0; j < 3; ++j) {
        if (tri[j] == vertex) return j;
      }
      return -1;
    };
    const int n1 = local(other[(apex + 1) % 3]);
    const int n2 = local(other[(apex + 2) % 3]);
    patch.elements.push_back({w, n1, 3 + k});
    patch.elements.push_back({w, 3 + k, n2});
    patch.host.push_back(nb);
    patch.host.push_back(nb);
  }
  return patch;
}

}  // namespace gflow
