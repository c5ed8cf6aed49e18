#pragma once

#include <algorithm>
#include <cstddef>
#include <map>
#include <vector>

#include "coarse/error.hpp"
#include "coarse/graph.hpp"

namespace coarse {

using Permutation = std::vector<int>;

namespace detail {

// Colour refinement to the coarsest equitable partition. New colours are
// ranks of (colour, sorted neighbour colours), so two runs on isomorphic
// inputs give matching colours.
inline std::vector<int> refine_colors(const Graph& g, std::vector<int> color) {
  const int n = g.vertex_count();
  int classes = -1;
  while (true) {
    std::vector<std::vector<int>> sig(static_cast<std::size_t>(n));
    for (int w = 0; w < n; ++w) {
      auto& s = sig[w];
      s.push_back(color[w]);
      for (int u : g.neighbors(w)) s.push_back(color[u]);
      std::sort(s.begin() + 1, s.end());
    }
    std::map<std::vector<int>, int> rank;
    for (const auto& s : sig) rank.emplace(s, 0);
    int r = 0;
    for (auto& [s, v] : rank) v = r++;
    for (int w = 0; w < n; ++w) color[w] = rank[sig[w]];
    if (r == classes) return color;
    classes = r;
  }
}

inline std::vector<int> color_histogram(const std::vector<int>& color) {
  std::vector<int> h;
  for (int c : color) {
    if (c >= static_cast<int>(h.size())) h.resize(static_cast<std::size_t>(c) + 1, 0);
    ++h[c];
  }
  return h;
}

inline std::vector<int> individualize(const Graph& g, std::vector<int> color, int v) {
  color[v] = *std::max_element(color.begin(), color.end()) + 1;
  return refine_colors(g, std::move(color));
}

inline bool is_automorphism(const Graph& g, const Permutation& p) {
  for (auto [u, v] : g.edges()) {
    const auto& nb = g.neighbors(p[u]);
    if (!std::binary_search(nb.begin(), nb.end(), p[v])) return false;
  }
  return true;
}

}  // namespace detail

// Automorphisms of g fixing v (identity excluded), by individualization and
// refinement. Stops after `cap` automorphisms.
inline std::vector<Permutation> vertex_stabilizer(const Graph& g, int v, std::size_t cap = 4096) {
  const int n = g.vertex_count();
  if (v < 0 || v >= n) throw Rejection("vertex " + std::to_string(v) + " is not in the graph");
  std::vector<int> start(static_cast<std::size_t>(n), 0);
  start[v] = 1;
  // Reference path: individualize the first vertex of the smallest
  // nontrivial cell until the partition is discrete.
  std::vector<std::vector<int>> levels{detail::refine_colors(g, start)};
  std::vector<int> cell_color;
  while (true) {
    const auto& c = levels.back();
    auto h = detail::color_histogram(c);
    int best = -1;
    for (int k = 0; k < static_cast<int>(h.size()); ++k)
      if (h[k] > 1 && (best < 0 || h[k] < h[best])) best = k;
    if (best < 0) break;
    int a = static_cast<int>(std::find(c.begin(), c.end(), best) - c.begin());
    cell_color.push_back(best);
    levels.push_back(detail::individualize(g, c, a));
  }
  const int depth = static_cast<int>(cell_color.size());
  std::vector<std::vector<int>> hist;
  for (const auto& l : levels) hist.push_back(detail::color_histogram(l));
  std::vector<int> vertex_of(static_cast<std::size_t>(n));
  for (int w = 0; w < n; ++w) vertex_of[levels.back()[w]] = w;

  std::vector<Permutation> out;
  auto dfs = [&](auto&& self, int i, const std::vector<int>& B) -> void {
    if (out.size() >= cap) return;
    if (i == depth) {
      Permutation p(static_cast<std::size_t>(n));
      bool identity = true;
      for (int w = 0; w < n; ++w) {
        p[vertex_of[B[w]]] = w;
      }
      for (int w = 0; w < n; ++w) identity = identity && p[w] == w;
      if (!identity && detail::is_automorphism(g, p)) out.push_back(std::move(p));
      return;
    }
    for (int b = 0; b < n; ++b) {
      if (B[b] != cell_color[i]) continue;
      auto next = detail::individualize(g, B, b);
      if (detail::color_histogram(next) == hist[i + 1]) self(self, i + 1, next);
      if (out.size() >= cap) return;
    }
  };
  if (detail::color_histogram(levels.front()) == hist.front()) dfs(dfs, 0, levels.front());
  return out;
}

}  // namespace coarse
