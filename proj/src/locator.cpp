#include <algorithm>
#include <sstream>

#include "gflow/errors.hpp"
#include "gflow/mesh.hpp"

namespace gflow {

namespace {

constexpr std::size_t kLeafCapacity = 12;
constexpr int kMaxDepth = 28;

bool overlaps(const Point2& alo, const Point2& ahi, const Point2& blo, const Point2& bhi) {
  return alo.x() <= bhi.x() && blo.x() <= ahi.x() && alo.y() <= bhi.y() && blo.y() <= ahi.y();
}

}  // namespace

PointLocator::PointLocator(std::shared_ptr<const Mesh> mesh) : mesh_(std::move(mesh)) {
  const auto& verts = mesh_->vertices();
  Point2 lo = verts.empty() ? Point2::Zero() : verts.front();
  Point2 hi = lo;
  for (const auto& p : verts) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  const double pad = 1e-9 * std::max(1.0, (hi - lo).maxCoeff());
  lo.array() -= pad;
  hi.array() += pad;
  nodes_.push_back(Node{lo, hi, -1, {}});

  boxes_.resize(mesh_->n_triangles());
  for (int t = 0; t < mesh_->n_triangles(); ++t) {
    const auto c = mesh_->corners(t);
    Point2 tlo = c[0].cwiseMin(c[1]).cwiseMin(c[2]);
    Point2 thi = c[0].cwiseMax(c[1]).cwiseMax(c[2]);
    const double slack = kLocateTolerance * std::max(1.0, (thi - tlo).maxCoeff());
    tlo.array() -= slack;
    thi.array() += slack;
    boxes_[t] = {tlo, thi};
    insert(0, t, tlo, thi, 0);
  }
}

void PointLocator::insert(int node, int tri, const Point2& lo, const Point2& hi, int depth) {
  if (!overlaps(lo, hi, nodes_[node].lo, nodes_[node].hi)) return;
  if (nodes_[node].child >= 0) {
    const int first = nodes_[node].child;
    for (int q = 0; q < 4; ++q) insert(first + q, tri, lo, hi, depth + 1);
    return;
  }
  nodes_[node].items.push_back(tri);
  if (nodes_[node].items.size() > kLeafCapacity && depth < kMaxDepth) split(node, depth);
}

void PointLocator::split(int node, int depth) {
  const Point2 lo = nodes_[node].lo, hi = nodes_[node].hi;
  const Point2 mid = 0.5 * (lo + hi);
  const int first = static_cast<int>(nodes_.size());
  nodes_.push_back(Node{lo, mid, -1, {}});
  nodes_.push_back(Node{Point2(mid.x(), lo.y()), Point2(hi.x(), mid.y()), -1, {}});
  nodes_.push_back(Node{Point2(lo.x(), mid.y()), Point2(mid.x(), hi.y()), -1, {}});
  nodes_.push_back(Node{mid, hi, -1, {}});
  std::vector<int> items = std::move(nodes_[node].items);
  nodes_[node].items.clear();
  nodes_[node].child = first;
  // Stop splitting when a split does not separate anything (e.g. many
  // triangles meeting at one point).
  bool separated = false;
  for (int t : items) {
    int hits = 0;
    for (int q = 0; q < 4; ++q) {
      const auto& box = boxes_[t];
      if (overlaps(box[0], box[1], nodes_[first + q].lo, nodes_[first + q].hi)) ++hits;
    }
    if (hits < 4) separated = true;
  }
  for (int t : items) {
    for (int q = 0; q < 4; ++q) {
      auto& child = nodes_[first + q];
      const auto& box = boxes_[t];
      if (overlaps(box[0], box[1], child.lo, child.hi)) child.items.push_back(t);
    }
  }
  if (!separated) return;
  for (int q = 0; q < 4; ++q) {
    if (nodes_[first + q].items.size() > kLeafCapacity && depth + 1 < kMaxDepth) split(first + q, depth + 1);
  }
}

void PointLocator::collect(int node, const Point2& lo, const Point2& hi, std::vector<int>& out) const {
  const Node& n = nodes_[node];
  if (!overlaps(lo, hi, n.lo, n.hi)) return;
  if (n.child < 0) {
    for (int t : n.items) {
      if (overlaps(lo, hi, boxes_[t][0], boxes_[t][1])) out.push_back(t);
    }
    return;
  }
  for (int q = 0; q < 4; ++q) collect(n.child + q, lo, hi, out);
}

std::vector<int> PointLocator::candidates(const Point2& lo, const Point2& hi) const {
  std::vector<int> out;
  collect(0, lo, hi, out);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

int PointLocator::locate(const Point2& p) const {
  int node = 0;
  const Node* n = &nodes_[0];
  if (p.x() < n->lo.x() || p.x() > n->hi.x() || p.y() < n->lo.y() || p.y() > n->hi.y()) {
    std::ostringstream msg;
    msg << "point (" << p.x() << ", " << p.y() << ") lies outside the mesh";
    throw OutOfDomain(msg.str());
  }
  while (n->child >= 0) {
    const Point2 mid = 0.5 * (n->lo + n->hi);
    node = n->child + (p.x() > mid.x() ? 1 : 0) + (p.y() > mid.y() ? 2 : 0);
    n = &nodes_[node];
  }
  int best = -1;
  for (int t : n->items) {
    if (best >= 0 && t > best) continue;
    if (barycentric(mesh_->corners(t), p).minCoeff() >= -kLocateTolerance) best = t;
  }
  if (best < 0) {
    std::ostringstream msg;
    msg << "point (" << p.x() << ", " << p.y() << ") lies outside the mesh";
    throw OutOfDomain(msg.str());
  }
  return best;
}

}  // namespace gflow
