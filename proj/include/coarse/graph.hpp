#pragma once

#include <algorithm>
#include <cstddef>
#include <deque>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "coarse/error.hpp"

namespace coarse {

using Edge = std::pair<int, int>;

// Finite simple undirected graph with sorted adjacency lists.
class Graph {
 public:
  Graph() = default;

  // Builds a simple graph from an edge list. Duplicate edges are collapsed;
  // self-loops and out-of-range endpoints are rejected. With
  // require_connected, a disconnected input is rejected and the message
  // lists the components.
  static Graph from_edges(int vertex_count, const std::vector<Edge>& edges, std::string label = {},
                          bool require_connected = true);

  int vertex_count() const { return static_cast<int>(adjacency_.size()); }
  std::size_t edge_count() const { return edge_count_; }
  const std::vector<int>& neighbors(int v) const { return adjacency_.at(static_cast<std::size_t>(v)); }
  int degree(int v) const { return static_cast<int>(neighbors(v).size()); }
  bool adjacent(int u, int v) const {
    const auto& nb = neighbors(u);
    return std::binary_search(nb.begin(), nb.end(), v);
  }

  int min_degree() const;
  int max_degree() const;
  bool is_regular(int degree) const { return min_degree() == degree && max_degree() == degree; }

  // Edges with u < v, in lexicographic order.
  std::vector<Edge> edges() const;

  const std::string& label() const { return label_; }
  void set_label(std::string label) { label_ = std::move(label); }

  // Set by constructors that know the automorphism group acts transitively
  // (cycles, complete graphs, Cayley graphs, Petersen, Heawood,
  // Tutte-Coxeter). Consumers may evaluate one representative vertex only.
  bool vertex_transitive() const { return vertex_transitive_; }
  void set_vertex_transitive(bool v) { vertex_transitive_ = v; }

  friend bool operator==(const Graph& a, const Graph& b) { return a.adjacency_ == b.adjacency_; }

 private:
  std::vector<std::vector<int>> adjacency_;
  std::size_t edge_count_ = 0;
  std::string label_;
  bool vertex_transitive_ = false;
};

// Component id per vertex, ids assigned in order of smallest member.
inline std::vector<int> connected_components(const std::vector<std::vector<int>>& adjacency) {
  const int n = static_cast<int>(adjacency.size());
  std::vector<int> comp(static_cast<std::size_t>(n), -1);
  int next = 0;
  std::deque<int> queue;
  for (int s = 0; s < n; ++s) {
    if (comp[static_cast<std::size_t>(s)] >= 0) continue;
    comp[static_cast<std::size_t>(s)] = next;
    queue.push_back(s);
    while (!queue.empty()) {
      int v = queue.front();
      queue.pop_front();
      for (int w : adjacency[static_cast<std::size_t>(v)]) {
        if (comp[static_cast<std::size_t>(w)] < 0) {
          comp[static_cast<std::size_t>(w)] = next;
          queue.push_back(w);
        }
      }
    }
    ++next;
  }
  return comp;
}

inline Graph Graph::from_edges(int vertex_count, const std::vector<Edge>& edges, std::string label,
                               bool require_connected) {
  if (vertex_count < 1) throw Rejection("graph needs at least one vertex, got " + std::to_string(vertex_count));
  Graph g;
  g.label_ = std::move(label);
  g.adjacency_.assign(static_cast<std::size_t>(vertex_count), {});
  for (auto [u, v] : edges) {
    if (u < 0 || v < 0 || u >= vertex_count || v >= vertex_count) {
      throw Rejection("edge (" + std::to_string(u) + "," + std::to_string(v) + ") out of range for " +
                      std::to_string(vertex_count) + " vertices");
    }
    if (u == v) throw Rejection("self-loop at vertex " + std::to_string(u));
    g.adjacency_[static_cast<std::size_t>(u)].push_back(v);
    g.adjacency_[static_cast<std::size_t>(v)].push_back(u);
  }
  for (auto& nb : g.adjacency_) {
    std::sort(nb.begin(), nb.end());
    nb.erase(std::unique(nb.begin(), nb.end()), nb.end());
    g.edge_count_ += nb.size();
  }
  g.edge_count_ /= 2;

  if (require_connected) {
    auto comp = connected_components(g.adjacency_);
    int count = *std::max_element(comp.begin(), comp.end()) + 1;
    if (count > 1) {
      std::ostringstream msg;
      msg << "graph";
      if (!g.label_.empty()) msg << " '" << g.label_ << "'";
      msg << " is disconnected with " << count << " components:";
      for (int c = 0; c < count; ++c) {
        msg << " {";
        bool first = true;
        for (int v = 0; v < vertex_count; ++v) {
          if (comp[static_cast<std::size_t>(v)] != c) continue;
          msg << (first ? "" : ",") << v;
          first = false;
        }
        msg << "}";
      }
      throw Rejection(msg.str());
    }
  }
  return g;
}

inline int Graph::min_degree() const {
  int best = adjacency_.empty() ? 0 : degree(0);
  for (const auto& nb : adjacency_) best = std::min(best, static_cast<int>(nb.size()));
  return best;
}

inline int Graph::max_degree() const {
  int best = 0;
  for (const auto& nb : adjacency_) best = std::max(best, static_cast<int>(nb.size()));
  return best;
}

inline std::vector<Edge> Graph::edges() const {
  std::vector<Edge> out;
  out.reserve(edge_count_);
  for (int u = 0; u < vertex_count(); ++u) {
    for (int v : neighbors(u)) {
      if (u < v) out.emplace_back(u, v);
    }
  }
  return out;
}

// Single-source BFS distances; -1 marks unreachable vertices.
inline std::vector<int> bfs_distances(const Graph& g, int source) {
  std::vector<int> dist(static_cast<std::size_t>(g.vertex_count()), -1);
  std::deque<int> queue{source};
  dist[static_cast<std::size_t>(source)] = 0;
  while (!queue.empty()) {
    int v = queue.front();
    queue.pop_front();
    for (int w : g.neighbors(v)) {
      if (dist[static_cast<std::size_t>(w)] < 0) {
        dist[static_cast<std::size_t>(w)] = dist[static_cast<std::size_t>(v)] + 1;
        queue.push_back(w);
      }
    }
  }
  return dist;
}

// Length of the shortest simple cycle, std::nullopt for forests.
// For every edge (u,v): shortest u-v path avoiding that edge, plus one.
inline std::optional<int> girth(const Graph& g) {
  const int n = g.vertex_count();
  std::optional<int> best;
  std::vector<int> dist(static_cast<std::size_t>(n));
  std::deque<int> queue;
  for (auto [u, v] : g.edges()) {
    std::fill(dist.begin(), dist.end(), -1);
    dist[static_cast<std::size_t>(u)] = 0;
    queue.assign({u});
    // Paths longer than best-1 cannot improve the answer.
    const int limit = best ? *best - 1 : n;
    while (!queue.empty() && dist[static_cast<std::size_t>(v)] < 0) {
      int x = queue.front();
      queue.pop_front();
      if (dist[static_cast<std::size_t>(x)] >= limit) break;
      for (int y : g.neighbors(x)) {
        if ((x == u && y == v) || (x == v && y == u)) continue;
        if (dist[static_cast<std::size_t>(y)] < 0) {
          dist[static_cast<std::size_t>(y)] = dist[static_cast<std::size_t>(x)] + 1;
          queue.push_back(y);
        }
      }
    }
    int d = dist[static_cast<std::size_t>(v)];
    if (d > 0 && (!best || d + 1 < *best)) best = d + 1;
  }
  return best;
}

// ---------------------------------------------------------------------------
// Constructors for the example families

inline Graph cycle_graph(int n) {
  if (n < 3) throw Rejection("cycle needs n >= 3, got " + std::to_string(n));
  std::vector<Edge> e;
  for (int i = 0; i < n; ++i) e.emplace_back(i, (i + 1) % n);
  Graph g = Graph::from_edges(n, e, "C" + std::to_string(n));
  g.set_vertex_transitive(true);
  return g;
}

inline Graph path_graph(int n) {
  if (n < 1) throw Rejection("path needs n >= 1, got " + std::to_string(n));
  std::vector<Edge> e;
  for (int i = 0; i + 1 < n; ++i) e.emplace_back(i, i + 1);
  Graph g = Graph::from_edges(n, e, "P" + std::to_string(n));
  g.set_vertex_transitive(n <= 2);
  return g;
}

inline Graph complete_graph(int n) {
  if (n < 1) throw Rejection("complete graph needs n >= 1, got " + std::to_string(n));
  std::vector<Edge> e;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) e.emplace_back(i, j);
  Graph g = Graph::from_edges(n, e, "K" + std::to_string(n));
  g.set_vertex_transitive(true);
  return g;
}

namespace detail {

struct CageTable {
  std::string_view name;
  int vertices;
  bool transitive;
  std::vector<Edge> edges;
};

inline const std::vector<CageTable>& cage_tables() {
  static const std::vector<CageTable> tables = {
      {"petersen", 10, true,
       {{0, 1}, {0, 4}, {0, 5}, {1, 2}, {1, 6}, {2, 3}, {2, 7}, {3, 4}, {3, 8}, {4, 9}, {5, 7}, {5, 8},
        {6, 8}, {6, 9}, {7, 9}}},
      {"heawood", 14, true,
       {{0, 1}, {0, 5}, {0, 13}, {1, 2}, {1, 10}, {2, 3}, {2, 7}, {3, 4}, {3, 12}, {4, 5}, {4, 9},
        {5, 6}, {6, 7}, {6, 11}, {7, 8}, {8, 9}, {8, 13}, {9, 10}, {10, 11}, {11, 12}, {12, 13}}},
      // The McGee graph is not vertex-transitive.
      {"mcgee", 24, false,
       {{0, 1}, {0, 12}, {0, 23}, {1, 2}, {1, 8}, {2, 3}, {2, 19}, {3, 4}, {3, 15}, {4, 5}, {4, 11},
        {5, 6}, {5, 22}, {6, 7}, {6, 18}, {7, 8}, {7, 14}, {8, 9}, {9, 10}, {9, 21}, {10, 11},
        {10, 17}, {11, 12}, {12, 13}, {13, 14}, {13, 20}, {14, 15}, {15, 16}, {16, 17}, {16, 23},
        {17, 18}, {18, 19}, {19, 20}, {20, 21}, {21, 22}, {22, 23}}},
      {"tutte-coxeter", 30, true,
       {{0, 1}, {0, 17}, {0, 29}, {1, 2}, {1, 22}, {2, 3}, {2, 9}, {3, 4}, {3, 26}, {4, 5}, {4, 13},
        {5, 6}, {5, 18}, {6, 7}, {6, 23}, {7, 8}, {7, 28}, {8, 9}, {8, 15}, {9, 10}, {10, 11},
        {10, 19}, {11, 12}, {11, 24}, {12, 13}, {12, 29}, {13, 14}, {14, 15}, {14, 21}, {15, 16},
        {16, 17}, {16, 25}, {17, 18}, {18, 19}, {19, 20}, {20, 21}, {20, 27}, {21, 22}, {22, 23},
        {23, 24}, {24, 25}, {25, 26}, {26, 27}, {27, 28}, {28, 29}}},
  };
  return tables;
}

}  // namespace detail

inline std::vector<std::string> cage_names() {
  std::vector<std::string> out;
  for (const auto& t : detail::cage_tables()) out.emplace_back(t.name);
  return out;
}

// Petersen (girth 5), Heawood (6), McGee (7), Tutte-Coxeter (8); all cubic.
inline Graph named_cage(std::string_view name) {
  for (const auto& t : detail::cage_tables()) {
    if (t.name == name || (name == "tutte_coxeter" && t.name == "tutte-coxeter")) {
      Graph g = Graph::from_edges(t.vertices, t.edges, std::string(t.name));
      g.set_vertex_transitive(t.transitive);
      return g;
    }
  }
  throw Rejection("unknown named graph '" + std::string(name) + "'");
}

// Descriptor grammar: cycle:N | path:N | complete:N | petersen | heawood |
// mcgee | tutte-coxeter. Edge lists go through Graph::from_edges.
inline Graph build_graph(std::string_view descriptor) {
  auto colon = descriptor.find(':');
  if (colon == std::string_view::npos) return named_cage(descriptor);
  std::string_view kind = descriptor.substr(0, colon);
  std::string arg(descriptor.substr(colon + 1));
  int n = 0;
  try {
    std::size_t used = 0;
    n = std::stoi(arg, &used);
    if (used != arg.size()) throw std::invalid_argument(arg);
  } catch (const std::exception&) {
    throw FormatError("bad size in graph descriptor '" + std::string(descriptor) + "'");
  }
  if (kind == "cycle") return cycle_graph(n);
  if (kind == "path") return path_graph(n);
  if (kind == "complete") return complete_graph(n);
  throw FormatError("unknown graph kind '" + std::string(kind) + "'");
}

}  // namespace coarse
