#include <gtest/gtest.h>

#include <algorithm>
#include <climits>
#include <random>
#include <set>

#include "coarse/graph.hpp"
#include "coarse/metric.hpp"
#include "coarse/rational.hpp"

using namespace coarse;

namespace {

// Floyd-Warshall, independent of the BFS metric.
std::vector<std::vector<int>> floyd(const Graph& g) {
  const int n = g.vertex_count();
  const int inf = INT_MAX / 4;
  std::vector<std::vector<int>> d(n, std::vector<int>(n, inf));
  for (int v = 0; v < n; ++v) {
    d[v][v] = 0;
    for (int w : g.neighbors(v)) d[v][w] = 1;
  }
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) d[i][j] = std::min(d[i][j], d[i][k] + d[k][j]);
  return d;
}

// Shortest cycle via per-vertex BFS trees: a non-tree edge (u,w) closes a
// walk of length d(u)+d(w)+1; the minimum over roots is the girth.
int girth_by_bfs_trees(const Graph& g) {
  const int n = g.vertex_count();
  int best = INT_MAX;
  for (int r = 0; r < n; ++r) {
    std::vector<int> dist(n, -1), parent(n, -1);
    std::vector<int> queue{r};
    dist[r] = 0;
    for (std::size_t h = 0; h < queue.size(); ++h) {
      int u = queue[h];
      for (int w : g.neighbors(u)) {
        if (dist[w] < 0) {
          dist[w] = dist[u] + 1;
          parent[w] = u;
          queue.push_back(w);
        } else if (parent[u] != w) {
          best = std::min(best, dist[u] + dist[w] + 1);
        }
      }
    }
  }
  return best;
}

bool induces_forest(const Graph& g, const std::vector<int>& members) {
  std::set<int> in(members.begin(), members.end());
  std::size_t edges = 0;
  for (int v : members)
    for (int w : g.neighbors(v))
      if (v < w && in.count(w)) ++edges;
  // connected induced subgraph (a ball) is a tree iff |E| = |V| - 1
  return edges + 1 == members.size();
}

}  // namespace

TEST(Graph, CycleSixIsTwoRegular) {
  Graph g = build_graph("cycle:6");
  EXPECT_EQ(g.vertex_count(), 6);
  EXPECT_EQ(g.edge_count(), 6u);
  EXPECT_TRUE(g.is_regular(2));
}

TEST(Graph, CompleteFourHasSixEdges) { EXPECT_EQ(complete_graph(4).edge_count(), 6u); }

TEST(Graph, PetersenDegrees) {
  Graph g = named_cage("petersen");
  EXPECT_EQ(g.vertex_count(), 10);
  EXPECT_EQ(g.edge_count(), 15u);
  for (int v = 0; v < 10; ++v) EXPECT_EQ(g.degree(v), 3);
}

TEST(Graph, CagesAreCubic) {
  for (const auto& name : cage_names()) {
    Graph g = named_cage(name);
    EXPECT_TRUE(g.is_regular(3)) << name;
  }
}

TEST(Graph, RejectsDisconnectedAndNamesComponents) {
  try {
    Graph::from_edges(4, {{0, 1}, {2, 3}});
    FAIL() << "expected rejection";
  } catch (const Rejection& e) {
    std::string msg = e.what();
    EXPECT_NE(msg.find("{0,1}"), std::string::npos) << msg;
    EXPECT_NE(msg.find("{2,3}"), std::string::npos) << msg;
  }
}

TEST(Graph, RejectsBadInput) {
  EXPECT_THROW(Graph::from_edges(3, {{0, 0}, {0, 1}, {1, 2}}), Rejection);
  EXPECT_THROW(Graph::from_edges(3, {{0, 3}}), Rejection);
  EXPECT_THROW(cycle_graph(2), Rejection);
  EXPECT_THROW(path_graph(0), Rejection);
  EXPECT_THROW(complete_graph(0), Rejection);
  EXPECT_THROW(build_graph("mobius"), Rejection);
}

TEST(Graph, DuplicateEdgesCollapse) {
  Graph g = Graph::from_edges(3, {{0, 1}, {1, 0}, {1, 2}, {0, 1}});
  EXPECT_EQ(g.edge_count(), 2u);
}

TEST(Metric, SmallDistances) {
  EXPECT_EQ(bfs_metric(cycle_graph(6)).distance(0, 3), 3);
  EXPECT_EQ(bfs_metric(path_graph(4)).distance(0, 3), 3);
  EXPECT_EQ(bfs_metric(named_cage("petersen")).diameter(), 2);
}

TEST(Metric, MatchesFloydOnAllExampleGraphs) {
  std::vector<Graph> graphs{cycle_graph(9), path_graph(7), complete_graph(5)};
  for (const auto& name : cage_names()) graphs.push_back(named_cage(name));
  for (const auto& g : graphs) {
    auto ref = floyd(g);
    MetricSpace m(g);
    const int n = g.vertex_count();
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) ASSERT_EQ(m.distance(i, j), ref[i][j]) << g.label();
  }
}

TEST(Metric, AxiomsHoldExhaustively) {
  MetricSpace m(named_cage("heawood"));
  const int n = m.size();
  for (int x = 0; x < n; ++x)
    for (int y = 0; y < n; ++y) {
      ASSERT_EQ(m.distance(x, y) == 0, x == y);
      ASSERT_EQ(m.distance(x, y), m.distance(y, x));
      for (int z = 0; z < n; ++z) ASSERT_LE(m.distance(x, z), m.distance(x, y) + m.distance(y, z));
    }
}

TEST(Metric, RejectsDisconnected) {
  Graph g = Graph::from_edges(4, {{0, 1}, {2, 3}}, "", false);
  EXPECT_THROW(MetricSpace{g}, Rejection);
}

TEST(Girth, SmallCases) {
  EXPECT_EQ(girth(complete_graph(3)), 3);
  EXPECT_FALSE(girth(path_graph(5)).has_value());
  EXPECT_EQ(girth(cycle_graph(11)), 11);
}

TEST(Girth, Cages) {
  EXPECT_EQ(girth(named_cage("petersen")), 5);
  EXPECT_EQ(girth(named_cage("heawood")), 6);
  EXPECT_EQ(girth(named_cage("mcgee")), 7);
  EXPECT_EQ(girth(named_cage("tutte-coxeter")), 8);
  for (const auto& name : cage_names()) {
    Graph g = named_cage(name);
    EXPECT_EQ(*girth(g), girth_by_bfs_trees(g)) << name;
  }
}

TEST(Girth, RandomGraphsAgreeWithTreeMethod) {
  std::mt19937 rng(7);
  for (int trial = 0; trial < 40; ++trial) {
    int n = 4 + static_cast<int>(rng() % 9);
    std::vector<Edge> edges;
    for (int v = 1; v < n; ++v) edges.emplace_back(static_cast<int>(rng() % v), v);
    int extra = static_cast<int>(rng() % 5);
    for (int k = 0; k < extra; ++k) {
      int a = static_cast<int>(rng() % n), b = static_cast<int>(rng() % n);
      if (a != b) edges.emplace_back(a, b);
    }
    Graph g = Graph::from_edges(n, edges);
    int ref = girth_by_bfs_trees(g);
    auto got = girth(g);
    if (ref == INT_MAX) {
      EXPECT_FALSE(got.has_value());
    } else {
      ASSERT_TRUE(got.has_value());
      EXPECT_EQ(*got, ref);
    }
  }
}

TEST(Girth, LargeGirthBallsAreTrees) {
  for (const auto& name : cage_names()) {
    Graph g = named_cage(name);
    int gg = *girth(g);
    MetricSpace m(g);
    for (int r = 0; 2 * r + 1 < gg; ++r)
      for (int x = 0; x < g.vertex_count(); ++x) EXPECT_TRUE(induces_forest(g, ball(m, x, r).members)) << name;
  }
}

// With odd girth 2r+1 two sphere points can be adjacent: 2r < girth alone
// does not make the ball a tree.
TEST(Girth, OddGirthBoundaryBallHasCycle) {
  Graph p = named_cage("petersen");
  EXPECT_FALSE(induces_forest(p, ball(MetricSpace(p), 0, 2).members));
  Graph c = cycle_graph(7);
  EXPECT_FALSE(induces_forest(c, ball(MetricSpace(c), 0, 3).members));
}

TEST(CoarseUnion, CrossBlockDistance) {
  CoarseUnion u({cycle_graph(4), cycle_graph(8)});
  EXPECT_EQ(u.distance(0, 4), 5);
  EXPECT_EQ(u.distance(4, 8), 4);
  CoarseUnion v({cycle_graph(4), cycle_graph(4), cycle_graph(8)});
  EXPECT_EQ(v.distance(0, 4), 3);
  EXPECT_EQ(v.distance(0, 8), 5);
  EXPECT_THROW(CoarseUnion(std::vector<Graph>{}), Rejection);
}

TEST(CoarseUnion, FormulaOnAllPairs) {
  CoarseUnion u({cycle_graph(3), path_graph(5), named_cage("petersen"), cycle_graph(10)});
  for (int p = 0; p < u.size(); ++p)
    for (int q = 0; q < u.size(); ++q) {
      int bp = u.block_of(p), bq = u.block_of(q);
      int expect = bp == bq ? u.block_metric(bp).distance(u.local(p), u.local(q))
                            : std::max(u.block_diameter(bp), u.block_diameter(bq)) + 1;
      ASSERT_EQ(u.distance(p, q), expect);
    }
}

TEST(Ball, CycleBall) {
  MetricSpace m(cycle_graph(8));
  auto b = ball(m, 0, 2);
  EXPECT_EQ(b.members, (std::vector<int>{0, 1, 2, 6, 7}));
  EXPECT_EQ(b.diameter, 4);
  auto z = ball(m, 3, 0);
  EXPECT_EQ(z.members, std::vector<int>{3});
  EXPECT_EQ(z.diameter, 0);
}

TEST(Ball, CrossesBlocksAtCrossDistance) {
  CoarseUnion u({cycle_graph(4), cycle_graph(8)});
  EXPECT_EQ(ball(u, 0, 5).size(), 12u);
  EXPECT_EQ(ball(u, 0, 4).size(), 4u);
  EXPECT_EQ(block_ball(u, 0, 5).members, ball(u, 0, 5).members);
  EXPECT_EQ(block_ball(u, 6, 3).members, ball(u, 6, 3).members);
}

TEST(Ball, Monotone) {
  MetricSpace m(named_cage("mcgee"));
  for (int r = 0; r < 5; ++r) {
    auto a = ball(m, 5, r), b = ball(m, 5, r + 1);
    EXPECT_TRUE(std::includes(b.members.begin(), b.members.end(), a.members.begin(), a.members.end()));
  }
}

TEST(Subset, RejectsDuplicates) {
  MetricSpace m(cycle_graph(5));
  EXPECT_THROW(make_subset(m, {1, 2, 1}), Rejection);
  EXPECT_EQ(make_subset(m, {0, 2}).diameter, 2);
}

TEST(Rational, ParsesFractionsAndDecimals) {
  EXPECT_EQ(parse_rational("1/4"), make_rational(1, 4));
  EXPECT_EQ(parse_rational("2/8"), make_rational(1, 4));
  EXPECT_EQ(parse_rational("0.25"), make_rational(1, 4));
  EXPECT_EQ(parse_rational(".5"), make_rational(1, 2));
  EXPECT_EQ(parse_rational("-1.5"), make_rational(-3, 2));
  EXPECT_EQ(parse_rational("3"), Rational(3));
  EXPECT_EQ(parse_rational("0.1"), make_rational(1, 10));
  for (const char* bad : {"", "abc", "1/0", "1.2.3", ".", "1e3", "0.x"}) EXPECT_THROW(parse_rational(bad), FormatError) << bad;
}
