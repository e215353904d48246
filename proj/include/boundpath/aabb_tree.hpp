#pragma once

#include "boundpath/types.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <span>
#include <utility>
#include <vector>

namespace boundpath {

template <int Dim>
struct Aabb {
  Vec<Dim> lo = Vec<Dim>::Constant(std::numeric_limits<double>::infinity());
  Vec<Dim> hi = Vec<Dim>::Constant(-std::numeric_limits<double>::infinity());

  void extend(const Vec<Dim>& p) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  void extend(const Aabb& b) {
    lo = lo.cwiseMin(b.lo);
    hi = hi.cwiseMax(b.hi);
  }
  bool contains(const Vec<Dim>& p) const { return (p.array() >= lo.array()).all() && (p.array() <= hi.array()).all(); }
  bool overlaps(const Aabb& b) const { return (lo.array() <= b.hi.array()).all() && (b.lo.array() <= hi.array()).all(); }
  double squared_distance(const Vec<Dim>& p) const {
    const Vec<Dim> d = (lo - p).cwiseMax(p - hi).cwiseMax(Vec<Dim>::Zero());
    return d.squaredNorm();
  }
  Vec<Dim> center() const { return 0.5 * (lo + hi); }
};

/// Binary bounding-box hierarchy with one primitive per leaf.
///
/// Nodes are stored in pre-order so that refit() can sweep them back to front.
template <int Dim>
class AabbTree {
 public:
  struct Node {
    Aabb<Dim> box;
    int left = -1;
    int right = -1;
    int primitive = -1;  // leaf when >= 0
  };

  AabbTree() = default;
  explicit AabbTree(std::span<const Aabb<Dim>> boxes) { build(boxes); }

  void build(std::span<const Aabb<Dim>> boxes) {
    nodes_.clear();
    leaf_of_.assign(boxes.size(), -1);
    if (boxes.empty()) return;
    nodes_.reserve(2 * boxes.size());
    std::vector<int> order(boxes.size());
    std::iota(order.begin(), order.end(), 0);
    build_range(boxes, order, 0, static_cast<int>(order.size()));
  }

  /// Recompute node boxes bottom-up; topology is kept.
  void refit(std::span<const Aabb<Dim>> boxes) {
    for (int i = static_cast<int>(nodes_.size()) - 1; i >= 0; --i) {
      Node& n = nodes_[static_cast<std::size_t>(i)];
      if (n.primitive >= 0) {
        n.box = boxes[static_cast<std::size_t>(n.primitive)];
      } else {
        n.box = nodes_[static_cast<std::size_t>(n.left)].box;
        n.box.extend(nodes_[static_cast<std::size_t>(n.right)].box);
      }
    }
  }

  bool empty() const { return nodes_.empty(); }
  std::size_t size() const { return leaf_of_.size(); }
  const std::vector<Node>& nodes() const { return nodes_; }

  /// Best-first enumeration of primitives whose boxes lie within `radius` of
  /// p, in increasing box distance. `visit(primitive, radius)` may shrink
  /// radius; nodes farther than the current radius are pruned.
  /// `heap` is caller-owned scratch.
  template <class Visit>
  void enumerate_nearest(const Vec<Dim>& p, double radius, Visit&& visit,
                         std::vector<std::pair<double, int>>& heap) const {
    heap.clear();
    if (nodes_.empty()) return;
    // Ties break on node index so the visiting order is a total order,
    // independent of how the radius evolved.
    auto cmp = [](const std::pair<double, int>& a, const std::pair<double, int>& b) { return a > b; };
    auto push = [&](int node) {
      const double d2 = nodes_[static_cast<std::size_t>(node)].box.squared_distance(p);
      heap.emplace_back(d2, node);
      std::push_heap(heap.begin(), heap.end(), cmp);
    };
    push(0);
    while (!heap.empty()) {
      std::pop_heap(heap.begin(), heap.end(), cmp);
      const auto [d2, node] = heap.back();
      heap.pop_back();
      if (d2 > radius * radius) continue;
      const Node& n = nodes_[static_cast<std::size_t>(node)];
      if (n.primitive >= 0) {
        visit(n.primitive, radius);
      } else {
        push(n.left);
        push(n.right);
      }
    }
  }

  /// Visit every primitive whose box overlaps `query`.
  template <class Visit>
  void query_overlap(const Aabb<Dim>& query, Visit&& visit) const {
    if (nodes_.empty()) return;
    std::vector<int> stack{0};
    while (!stack.empty()) {
      const int node = stack.back();
      stack.pop_back();
      const Node& n = nodes_[static_cast<std::size_t>(node)];
      if (!n.box.overlaps(query)) continue;
      if (n.primitive >= 0) {
        visit(n.primitive);
      } else {
        stack.push_back(n.right);
        stack.push_back(n.left);
      }
    }
  }

 private:
  int build_range(std::span<const Aabb<Dim>> boxes, std::vector<int>& order, int begin, int end) {
    const int index = static_cast<int>(nodes_.size());
    nodes_.emplace_back();
    Aabb<Dim> box;
    Aabb<Dim> centers;
    for (int i = begin; i < end; ++i) {
      const auto& b = boxes[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])];
      box.extend(b);
      centers.extend(b.center());
    }
    if (end - begin == 1) {
      const int prim = order[static_cast<std::size_t>(begin)];
      nodes_[static_cast<std::size_t>(index)].box = box;
      nodes_[static_cast<std::size_t>(index)].primitive = prim;
      leaf_of_[static_cast<std::size_t>(prim)] = index;
      return index;
    }
    int axis = 0;
    const Vec<Dim> extent = centers.hi - centers.lo;
    for (int k = 1; k < Dim; ++k)
      if (extent[k] > extent[axis]) axis = k;
    const int mid = begin + (end - begin) / 2;
    std::nth_element(order.begin() + begin, order.begin() + mid, order.begin() + end, [&](int a, int b) {
      const double ca = boxes[static_cast<std::size_t>(a)].center()[axis];
      const double cb = boxes[static_cast<std::size_t>(b)].center()[axis];
      return ca < cb || (ca == cb && a < b);
    });
    const int left = build_range(boxes, order, begin, mid);
    const int right = build_range(boxes, order, mid, end);
    Node& n = nodes_[static_cast<std::size_t>(index)];
    n.box = box;
    n.left = left;
    n.right = right;
    return index;
  }

  std::vector<Node> nodes_;
  std::vector<int> leaf_of_;
};

}  // namespace boundpath
