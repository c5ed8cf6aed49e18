#pragma once

#include <algorithm>
#include <cstddef>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "coarse/error.hpp"
#include "coarse/graph.hpp"
#include "coarse/metric.hpp"
#include "coarse/witness.hpp"

namespace coarse {

// Non-backtracking walk in a simple graph, as its vertex sequence. A
// reduced walk from the base vertex is a vertex of the universal cover; a
// reduced closed walk at the base is a deck transformation.
using Walk = std::vector<int>;

inline int walk_length(const Walk& w) { return static_cast<int>(w.size()) - 1; }

// Appends v, cancelling an immediate backtrack.
inline void push_reduced(Walk& w, int v) {
  if (w.size() >= 2 && w[w.size() - 2] == v) {
    w.pop_back();
  } else {
    w.push_back(v);
  }
}

// Reduced form of a followed by b (b must start where a ends).
inline Walk concat(const Walk& a, const Walk& b) {
  if (a.empty() || b.empty() || a.back() != b.front()) throw Rejection("walks do not compose");
  Walk out = a;
  for (std::size_t i = 1; i < b.size(); ++i) push_reduced(out, b[i]);
  return out;
}

inline Walk reversed(const Walk& w) { return Walk(w.rbegin(), w.rend()); }

// Length after cyclic reduction: the translation length of a deck element.
inline int translation_length(const Walk& loop) {
  std::size_t lo = 0, hi = loop.size() - 1;
  while (hi - lo >= 2 && loop[lo + 1] == loop[hi - 1]) {
    ++lo;
    --hi;
  }
  return static_cast<int>(hi - lo);
}

inline void require_min_degree_two(const Graph& g) {
  for (int v = 0; v < g.vertex_count(); ++v) {
    if (g.degree(v) < 2) {
      throw Rejection("vertex " + std::to_string(v) + (g.label().empty() ? "" : " of " + g.label()) +
                      " has degree " + std::to_string(g.degree(v)) +
                      "; the universal cover needs every vertex of degree at least 2");
    }
  }
}

// Distinguished end: from the base, repeatedly step to the lowest-index
// neighbor other than the previous vertex. Extended on demand.
class BaseRay {
 public:
  BaseRay() = default;
  BaseRay(std::shared_ptr<const Graph> g, int base) : g_(std::move(g)), ray_{base} {}

  int at(std::size_t i) const {
    while (ray_.size() <= i) {
      int prev = ray_.size() >= 2 ? ray_[ray_.size() - 2] : -1;
      for (int v : g_->neighbors(ray_.back())) {
        if (v != prev) {
          ray_.push_back(v);
          break;
        }
      }
    }
    return ray_[i];
  }

  // First n vertices of the walk from the cover vertex w toward the end:
  // back along w to where it leaves the ray, then out along the ray.
  std::vector<int> segment(const Walk& w, int n) const {
    std::size_t j = 0;
    while (j + 1 < w.size() && w[j + 1] == at(j + 1)) ++j;
    std::vector<int> out;
    for (std::size_t i = w.size(); i-- > j && static_cast<int>(out.size()) < n;) out.push_back(w[i]);
    for (std::size_t i = j + 1; static_cast<int>(out.size()) < n; ++i) out.push_back(at(i));
    return out;
  }

 private:
  std::shared_ptr<const Graph> g_;
  mutable std::vector<int> ray_;
};

// Ball of radius rho around a lift of the base vertex in the universal
// cover, nodes numbered in breadth-first order (node 0 is the base lift).
class TreeLift {
 public:
  TreeLift(const Graph& g, int base, int rho) : g_(std::make_shared<const Graph>(g)), base_(base), rho_(rho) {
    if (base < 0 || base >= g.vertex_count()) throw Rejection("base vertex out of range");
    if (rho < 1) throw Rejection("truncation radius must be >= 1");
    require_min_degree_two(g);
    ray_ = BaseRay(g_, base);
    add_node(-1, base);
    for (std::size_t i = 0; i < vertex_.size(); ++i) {
      if (depth_[i] == rho_) continue;
      const int prev = parent_[i] < 0 ? -1 : vertex_[static_cast<std::size_t>(parent_[i])];
      for (int v : g_->neighbors(vertex_[i]))
        if (v != prev) add_node(static_cast<int>(i), v);
    }
    ray_node_.push_back(0);
    for (int d = 1; d <= rho_; ++d) ray_node_.push_back(child(ray_node_.back(), ray_.at(static_cast<std::size_t>(d))));
    if (!verify()) throw Rejection("truncated cover failed its tree check");
  }

  int size() const { return static_cast<int>(vertex_.size()); }
  int radius() const { return rho_; }
  int base() const { return base_; }
  const Graph& base_graph() const { return *g_; }
  std::shared_ptr<const Graph> base_graph_ptr() const { return g_; }
  const BaseRay& ray() const { return ray_; }

  int project(int node) const { return vertex_.at(static_cast<std::size_t>(node)); }
  int depth(int node) const { return depth_.at(static_cast<std::size_t>(node)); }
  int parent(int node) const { return parent_.at(static_cast<std::size_t>(node)); }
  const std::vector<int>& children(int node) const { return children_.at(static_cast<std::size_t>(node)); }

  int child(int node, int vertex) const {
    for (int c : children(node))
      if (vertex_[static_cast<std::size_t>(c)] == vertex) return c;
    return -1;
  }

  std::vector<int> neighbors(int node) const {
    std::vector<int> out = children(node);
    if (parent(node) >= 0) out.push_back(parent(node));
    return out;
  }

  Walk walk(int node) const {
    Walk w;
    for (int v = node; v >= 0; v = parent_[static_cast<std::size_t>(v)]) w.push_back(vertex_[static_cast<std::size_t>(v)]);
    std::reverse(w.begin(), w.end());
    return w;
  }

  // Node of a reduced walk from the base, if inside the truncation.
  std::optional<int> find(const Walk& w) const {
    if (w.empty() || w.front() != base_ || walk_length(w) > rho_) return std::nullopt;
    int node = 0;
    for (std::size_t i = 1; i < w.size(); ++i) {
      node = child(node, w[i]);
      if (node < 0) return std::nullopt;
    }
    return node;
  }

  // Tree distance through the deepest common ancestor.
  int distance(int a, int b) const {
    int d = 0;
    while (a != b) {
      if (depth(a) >= depth(b)) {
        a = parent(a);
      } else {
        b = parent(b);
      }
      ++d;
    }
    return d;
  }

  std::vector<int> ball(int node, int r) const {
    std::vector<int> out;
    for (int v = 0; v < size(); ++v)
      if (distance(node, v) <= r) out.push_back(v);
    return out;
  }

  // Segment of n cover vertices from node toward the distinguished end.
  std::vector<int> segment(int node, int n) const {
    std::vector<int> out;
    int v = node;
    while (ray_index(v) < 0 && static_cast<int>(out.size()) < n) {
      out.push_back(v);
      v = parent(v);
    }
    for (int i = ray_index(v); static_cast<int>(out.size()) < n; ++i) {
      if (i > rho_) {
        throw Rejection("segment of length " + std::to_string(n) + " from cover vertex " + std::to_string(node) +
                        " leaves the truncation; increase the truncation radius (now " + std::to_string(rho_) + ")");
      }
      out.push_back(ray_node_[static_cast<std::size_t>(i)]);
    }
    return out;
  }

  int ray_index(int node) const {
    int d = depth(node);
    return ray_node_[static_cast<std::size_t>(d)] == node ? d : -1;
  }

  // Tree shape and homomorphism checks: every non-root node has one parent
  // one level up, its projection is adjacent to the parent's and differs
  // from the grandparent's, and siblings project to distinct vertices.
  bool verify() const {
    std::size_t edges = 0;
    for (int v = 0; v < size(); ++v) {
      const auto& ch = children(v);
      edges += ch.size();
      std::vector<int> seen;
      for (int c : ch) {
        if (parent(c) != v || depth(c) != depth(v) + 1) return false;
        if (!g_->adjacent(project(v), project(c))) return false;
        if (parent(v) >= 0 && project(parent(v)) == project(c)) return false;
        seen.push_back(project(c));
      }
      std::sort(seen.begin(), seen.end());
      if (std::adjacent_find(seen.begin(), seen.end()) != seen.end()) return false;
    }
    return edges + 1 == vertex_.size();
  }

 private:
  void add_node(int parent, int v) {
    const int id = static_cast<int>(vertex_.size());
    vertex_.push_back(v);
    parent_.push_back(parent);
    depth_.push_back(parent < 0 ? 0 : depth_[static_cast<std::size_t>(parent)] + 1);
    children_.emplace_back();
    if (parent >= 0) children_[static_cast<std::size_t>(parent)].push_back(id);
  }

  std::shared_ptr<const Graph> g_;
  int base_;
  int rho_;
  BaseRay ray_;
  std::vector<int> vertex_, parent_, depth_;
  std::vector<std::vector<int>> children_;
  std::vector<int> ray_node_;  // ray vertex at each depth
};

inline TreeLift tree_lift(const Graph& g, int base, int rho) { return TreeLift(g, base, rho); }

// f_x uniform on the segment of n vertices from x toward the end, for every
// cover vertex within `radius` of the base lift.
inline WitnessFamily tree_ray_witness(const TreeLift& t, int n, int radius) {
  if (n < 1) throw Rejection("segment length must be >= 1");
  WitnessFamily w{0, n - 1, {}, {}};
  for (int x = 0; x < t.size(); ++x) {
    if (t.depth(x) > radius) continue;
    w.points.push_back(x);
    w.measures.push_back(uniform_measure(t.segment(x, n)));
  }
  return w;
}

// Deck transformation given by a reduced closed walk at the base, together
// with its action on the truncated cover: node p goes to the node of
// loop * walk(p) when that stays within the truncation.
struct DeckElement {
  Walk loop;
  std::vector<std::pair<int, int>> map;  // (node, image), sorted by node

  bool is_identity() const { return loop.size() == 1; }
  int translation_length() const { return coarse::translation_length(loop); }

  std::optional<int> apply(int node) const {
    auto it = std::lower_bound(map.begin(), map.end(), std::make_pair(node, -1));
    if (it == map.end() || it->first != node) return std::nullopt;
    return it->second;
  }
};

inline DeckElement deck_element(const TreeLift& t, Walk loop, const std::vector<int>& required = {}) {
  if (loop.empty() || loop.front() != t.base() || loop.back() != t.base()) {
    throw Rejection("deck element must be a closed walk at the base vertex");
  }
  DeckElement g{std::move(loop), {}};
  for (int p = 0; p < t.size(); ++p) {
    if (auto img = t.find(concat(g.loop, t.walk(p)))) g.map.emplace_back(p, *img);
  }
  for (int p : required) {
    if (!g.apply(p)) {
      throw Rejection("deck element is undetermined at cover vertex " + std::to_string(p) +
                      " within the truncation; increase the truncation radius (now " + std::to_string(t.radius()) +
                      ")");
    }
  }
  // Commutes with the projection and preserves adjacency on its domain.
  for (const auto& [p, q] : g.map) {
    if (t.project(p) != t.project(q)) throw Rejection("deck element does not commute with the projection");
    for (int c : t.children(p)) {
      if (auto qc = g.apply(c); qc && t.distance(q, *qc) != 1) throw Rejection("deck element breaks adjacency");
    }
  }
  return g;
}

// The unique deck element sending lift1 to lift2.
inline DeckElement deck_align(const TreeLift& t, int lift1, int lift2) {
  if (t.project(lift1) != t.project(lift2)) {
    throw Rejection("lifts project to different vertices " + std::to_string(t.project(lift1)) + " and " +
                    std::to_string(t.project(lift2)));
  }
  return deck_element(t, concat(t.walk(lift2), reversed(t.walk(lift1))), {lift1});
}

// a after b.
inline DeckElement compose(const TreeLift& t, const DeckElement& a, const DeckElement& b) {
  return deck_element(t, concat(a.loop, b.loop));
}

// Local isometry of the projection on B_node(r).
struct LocalIsometry {
  bool injective = true;     // distinct cover vertices, distinct images
  bool onto_ball = true;     // image is all of B_{pi(node)}(r)
  bool radial = true;        // distance to the center preserved
  bool pairwise = true;      // all pairwise distances preserved
};

inline LocalIsometry check_local_isometry(const TreeLift& t, const MetricSpace& base_metric, int node, int r) {
  LocalIsometry out;
  auto B = t.ball(node, r);
  const int c = t.project(node);
  std::vector<int> img;
  for (int p : B) {
    img.push_back(t.project(p));
    if (base_metric.distance(c, t.project(p)) != t.distance(node, p)) out.radial = false;
  }
  for (std::size_t i = 0; i < B.size(); ++i)
    for (std::size_t j = i + 1; j < B.size(); ++j)
      if (base_metric.distance(img[i], img[j]) != t.distance(B[i], B[j])) out.pairwise = false;
  std::sort(img.begin(), img.end());
  if (std::adjacent_find(img.begin(), img.end()) != img.end()) out.injective = false;
  img.erase(std::unique(img.begin(), img.end()), img.end());
  std::size_t target = 0;
  for (int v = 0; v < base_metric.size(); ++v)
    if (base_metric.distance(c, v) <= r) ++target;
  out.onto_ball = img.size() == target;
  return out;
}

}  // namespace coarse
