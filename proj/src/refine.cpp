#include <deque>
#include <unordered_map>

#include "gflow/errors.hpp"
#include "gflow/mesh.hpp"

namespace gflow {

namespace {

std::uint64_t edge_key(int a, int b) {
  if (a > b) std::swap(a, b);
  return (static_cast<std::uint64_t>(a) << 32) | static_cast<std::uint32_t>(b);
}

struct WorkTriangle {
  Triangle v;
  int ref;  // local index of the newest vertex, opposite the refinement edge
  int generation;
  int origin;
};

std::uint64_t ref_key(const WorkTriangle& t) {
  return edge_key(t.v[(t.ref + 1) % 3], t.v[(t.ref + 2) % 3]);
}

}  // namespace

RefinementResult refine(const Mesh& mesh, std::span<const int> marked) {
  const int nt = mesh.n_triangles();
  for (int t : marked) {
    if (t < 0 || t >= nt) throw InternalError("marked element " + std::to_string(t) + " out of range");
  }

  std::vector<WorkTriangle> work(nt);
  for (int t = 0; t < nt; ++t) {
    work[t] = {mesh.triangle(t), mesh.refinement_edge()[t], mesh.generation()[t], t};
  }

  // Edge -> midpoint vertex (-1 until created). Keys are edges of the input mesh.
  std::unordered_map<std::uint64_t, int> marked_edges;
  std::deque<int> pending;
  auto mark_edge = [&](int t, int k) {
    const auto& tri = work[t].v;
    if (!marked_edges.try_emplace(edge_key(tri[(k + 1) % 3], tri[(k + 2) % 3]), -1).second) return;
    pending.push_back(t);
    if (const int nb = mesh.neighbors()[t][k]; nb != kBoundary) pending.push_back(nb);
  };
  for (int t : marked) mark_edge(t, work[t].ref);

  // Closure: any triangle with a marked edge gets its refinement edge marked.
  while (!pending.empty()) {
    const int t = pending.front();
    pending.pop_front();
    const auto& tri = work[t].v;
    if (marked_edges.contains(ref_key(work[t]))) continue;
    for (int k = 0; k < 3; ++k) {
      if (marked_edges.contains(edge_key(tri[(k + 1) % 3], tri[(k + 2) % 3]))) {
        mark_edge(t, work[t].ref);
        break;
      }
    }
  }

  std::vector<Point2> vertices = mesh.vertices();
  RefinementMap map;
  map.old_vertex_count = mesh.n_vertices();
  map.old_triangle_count = nt;

  std::deque<int> queue;
  for (int t = 0; t < nt; ++t) {
    if (marked_edges.contains(ref_key(work[t]))) queue.push_back(t);
  }
  while (!queue.empty()) {
    const int slot = queue.front();
    queue.pop_front();
    const WorkTriangle parent = work[slot];
    const int a = parent.v[parent.ref];
    const int b = parent.v[(parent.ref + 1) % 3];
    const int c = parent.v[(parent.ref + 2) % 3];
    int& mid = marked_edges.at(edge_key(b, c));
    if (mid < 0) {
      mid = static_cast<int>(vertices.size());
      vertices.push_back(0.5 * (vertices[b] + vertices[c]));
      map.new_vertex_parents.push_back({b, c});
    }
    // Children (a, b, m) and (a, m, c); the midpoint is the newest vertex.
    work[slot] = {{a, b, mid}, 2, parent.generation + 1, parent.origin};
    work.push_back({{a, mid, c}, 1, parent.generation + 1, parent.origin});
    const int second = static_cast<int>(work.size()) - 1;
    for (int child : {slot, second}) {
      if (marked_edges.contains(ref_key(work[child]))) queue.push_back(child);
    }
  }

  map.children.assign(nt, {});
  std::vector<Triangle> triangles;
  std::vector<int> refs, generations;
  triangles.reserve(work.size());
  refs.reserve(work.size());
  generations.reserve(work.size());
  for (std::size_t s = 0; s < work.size(); ++s) {
    triangles.push_back(work[s].v);
    refs.push_back(work[s].ref);
    generations.push_back(work[s].generation);
    map.children[work[s].origin].push_back(static_cast<int>(s));
  }
  return {Mesh(std::move(vertices), std::move(triangles), std::move(refs), std::move(generations)),
          std::move(map)};
}

}  // namespace gflow
