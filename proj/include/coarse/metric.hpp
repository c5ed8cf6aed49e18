#pragma once

#include <algorithm>
#include <concepts>
#include <cstddef>
#include <string>
#include <vector>

#include "coarse/error.hpp"
#include "coarse/graph.hpp"

namespace coarse {

// Anything with a finite point set and an integer metric on it.
template <typename S>
concept FiniteMetric = requires(const S& s, int a, int b) {
  { s.size() } -> std::convertible_to<int>;
  { s.distance(a, b) } -> std::convertible_to<int>;
};

// All-pairs shortest-path metric of a connected graph.
class MetricSpace {
 public:
  MetricSpace() = default;

  explicit MetricSpace(const Graph& g) : n_(g.vertex_count()) {
    dist_.resize(static_cast<std::size_t>(n_) * static_cast<std::size_t>(n_));
    for (int s = 0; s < n_; ++s) {
      auto row = bfs_distances(g, s);
      for (int t = 0; t < n_; ++t) {
        if (row[static_cast<std::size_t>(t)] < 0) {
          throw Rejection("metric requested on disconnected graph" +
                          (g.label().empty() ? std::string() : " '" + g.label() + "'"));
        }
        dist_[index(s, t)] = row[static_cast<std::size_t>(t)];
      }
    }
    for (int d : dist_) diameter_ = std::max(diameter_, d);
  }

  int size() const { return n_; }
  int distance(int a, int b) const { return dist_[index(a, b)]; }
  int diameter() const { return diameter_; }

 private:
  std::size_t index(int a, int b) const {
    return static_cast<std::size_t>(a) * static_cast<std::size_t>(n_) + static_cast<std::size_t>(b);
  }
  int n_ = 0;
  int diameter_ = 0;
  std::vector<int> dist_;
};

inline MetricSpace bfs_metric(const Graph& g) { return MetricSpace(g); }

// Coarse disjoint union of connected graphs. Points are numbered globally,
// block after block. Distances across blocks i != j are
// max(diam X_i, diam X_j) + 1.
class CoarseUnion {
 public:
  CoarseUnion() = default;

  explicit CoarseUnion(std::vector<Graph> blocks) : blocks_(std::move(blocks)) {
    if (blocks_.empty()) throw Rejection("coarse disjoint union needs at least one block");
    offsets_.reserve(blocks_.size() + 1);
    offsets_.push_back(0);
    for (const auto& b : blocks_) {
      metrics_.emplace_back(b);
      offsets_.push_back(offsets_.back() + b.vertex_count());
    }
    block_of_.resize(static_cast<std::size_t>(offsets_.back()));
    for (std::size_t i = 0; i < blocks_.size(); ++i) {
      std::fill(block_of_.begin() + offsets_[i], block_of_.begin() + offsets_[i + 1], static_cast<int>(i));
    }
  }

  int size() const { return offsets_.empty() ? 0 : offsets_.back(); }
  int block_count() const { return static_cast<int>(blocks_.size()); }
  const Graph& block(int i) const { return blocks_.at(static_cast<std::size_t>(i)); }
  const std::vector<Graph>& blocks() const { return blocks_; }
  const MetricSpace& block_metric(int i) const { return metrics_.at(static_cast<std::size_t>(i)); }
  int block_diameter(int i) const { return block_metric(i).diameter(); }
  int block_size(int i) const { return block(i).vertex_count(); }

  int block_of(int p) const { return block_of_.at(static_cast<std::size_t>(p)); }
  int offset(int block) const { return offsets_.at(static_cast<std::size_t>(block)); }
  int local(int p) const { return p - offset(block_of(p)); }
  int global(int block, int local) const { return offset(block) + local; }

  int distance(int p, int q) const {
    int bp = block_of(p), bq = block_of(q);
    if (bp == bq) return metrics_[static_cast<std::size_t>(bp)].distance(p - offset(bp), q - offset(bp));
    return std::max(block_diameter(bp), block_diameter(bq)) + 1;
  }

 private:
  std::vector<Graph> blocks_;
  std::vector<MetricSpace> metrics_;
  std::vector<int> offsets_;
  std::vector<int> block_of_;
};

inline CoarseUnion coarse_disjoint_union(std::vector<Graph> blocks) { return CoarseUnion(std::move(blocks)); }

// A finite subset of an ambient metric space, members sorted ascending.
template <FiniteMetric Space>
struct SubsetView {
  const Space* ambient = nullptr;
  std::vector<int> members;
  int diameter = 0;

  std::size_t size() const { return members.size(); }
  bool contains(int p) const { return std::binary_search(members.begin(), members.end(), p); }
};

template <FiniteMetric Space>
SubsetView<Space> make_subset(const Space& space, std::vector<int> members) {
  std::sort(members.begin(), members.end());
  if (std::adjacent_find(members.begin(), members.end()) != members.end()) {
    throw Rejection("subset members must be distinct");
  }
  SubsetView<Space> view{&space, std::move(members), 0};
  for (std::size_t i = 0; i < view.members.size(); ++i) {
    int p = view.members[i];
    if (p < 0 || p >= space.size()) throw Rejection("subset member " + std::to_string(p) + " out of range");
    for (std::size_t j = i + 1; j < view.members.size(); ++j) {
      view.diameter = std::max(view.diameter, space.distance(p, view.members[j]));
    }
  }
  return view;
}

// Closed ball B_center(radius).
template <FiniteMetric Space>
SubsetView<Space> ball(const Space& space, int center, int radius) {
  if (radius < 0) throw Rejection("ball radius must be >= 0");
  if (center < 0 || center >= space.size()) throw Rejection("ball center out of range");
  std::vector<int> members;
  for (int p = 0; p < space.size(); ++p) {
    if (space.distance(center, p) <= radius) members.push_back(p);
  }
  return make_subset(space, std::move(members));
}

// Ball restricted to one block of a coarse union (the ball never leaves the
// block while radius < the cross-block distance; this walks the block only).
inline SubsetView<CoarseUnion> block_ball(const CoarseUnion& u, int center, int radius) {
  if (radius < 0) throw Rejection("ball radius must be >= 0");
  int b = u.block_of(center);
  int cross = u.block_diameter(b) + 1;
  if (radius >= cross) return ball(u, center, radius);
  const auto& m = u.block_metric(b);
  int lc = u.local(center);
  std::vector<int> members;
  for (int q = 0; q < m.size(); ++q) {
    if (m.distance(lc, q) <= radius) members.push_back(u.global(b, q));
  }
  SubsetView<CoarseUnion> view{&u, std::move(members), 0};
  for (std::size_t i = 0; i < view.members.size(); ++i)
    for (std::size_t j = i + 1; j < view.members.size(); ++j)
      view.diameter = std::max(view.diameter, m.distance(u.local(view.members[i]), u.local(view.members[j])));
  return view;
}

}  // namespace coarse
