#include <gtest/gtest.h>

#include <random>

#include "coarse/oracle.hpp"
#include "coarse/witness.hpp"

using namespace coarse;

namespace {

Graph random_connected(std::mt19937& rng, int n, int extra) {
  std::vector<Edge> edges;
  for (int v = 1; v < n; ++v) edges.emplace_back(static_cast<int>(rng() % v), v);
  for (int k = 0; k < extra; ++k) {
    int a = static_cast<int>(rng() % n), b = static_cast<int>(rng() % n);
    if (a != b) edges.emplace_back(a, b);
  }
  return Graph::from_edges(n, edges);
}

std::vector<int> random_subset(std::mt19937& rng, int n, int k) {
  std::vector<int> all(n);
  for (int i = 0; i < n; ++i) all[i] = i;
  std::shuffle(all.begin(), all.end(), rng);
  all.resize(static_cast<std::size_t>(k));
  return all;
}

// Window family on a cycle: f_x uniform on {x, ..., x+k-1} mod n.
WitnessFamily cycle_windows(int n, int k) {
  WitnessFamily w{1, k - 1, {}, {}};
  for (int x = 0; x < n; ++x) {
    std::vector<int> pts;
    for (int j = 0; j < k; ++j) pts.push_back((x + j) % n);
    w.points.push_back(x);
    w.measures.push_back(uniform_measure(pts));
  }
  return w;
}

EpsStarOptions float_opts() {
  EpsStarOptions o;
  o.mode = lp::NumericMode::Float;
  return o;
}

}  // namespace

TEST(Measures, L1Distance) {
  Measure a{{0, Rational(1, 2)}, {1, Rational(1, 2)}};
  Measure b{{1, Rational(1, 2)}, {2, Rational(1, 2)}};
  EXPECT_EQ(l1_distance(a, b), 1);
  EXPECT_EQ(l1_distance(a, a), 0);
  EXPECT_EQ(l1_distance(dirac(0), dirac(3)), 2);
}

TEST(CheckWitness, UniformWindowsOnCyclePass) {
  auto space = bfs_metric(cycle_graph(12));
  auto rep = check_witness(space, cycle_windows(12, 3), 1, Rational(2, 3), 2);
  EXPECT_TRUE(rep.passed);
  EXPECT_EQ(rep.max_variation, Rational(2, 3));
  EXPECT_EQ(rep.pairs_checked, 12u);
}

TEST(CheckWitness, DiracFamilyMeasuresTwo) {
  auto space = bfs_metric(cycle_graph(6));
  auto rep = check_witness(space, cycle_windows(6, 1), 1, Rational(1), 0);
  EXPECT_FALSE(rep.passed);
  EXPECT_EQ(rep.max_variation, 2);
  for (const auto& v : rep.violations) EXPECT_EQ(v.kind, ViolationKind::Variation);
}

TEST(CheckWitness, ReportsSupportAndNormalization) {
  auto space = bfs_metric(path_graph(5));
  WitnessFamily w{1, 1, {0, 1}, {dirac(3), {{1, Rational(1, 2)}}}};
  auto rep = check_witness(space, w, 1, Rational(2), 1);
  ASSERT_FALSE(rep.passed);
  bool support = false, norm = false;
  for (const auto& v : rep.violations) {
    if (v.kind == ViolationKind::Support && v.x == 0 && v.y == 3) support = true;
    if (v.kind == ViolationKind::Normalization && v.x == 1) norm = true;
  }
  EXPECT_TRUE(support);
  EXPECT_TRUE(norm);
}

TEST(EpsStar, Singleton) {
  auto space = bfs_metric(cycle_graph(5));
  auto r = eps_star(make_subset(space, {2}), 1, 0);
  EXPECT_EQ(*r.exact_value, 0);
}

TEST(EpsStar, TriangleWithZeroSupportIsTwo) {
  auto space = bfs_metric(complete_graph(3));
  auto r = eps_star(make_subset(space, {0, 1, 2}), 1, 0);
  EXPECT_EQ(*r.exact_value, 2);
}

// Optimal R = 1 variation on a long cycle is 2/(2S+1): the LP dual spreads
// weight along a window of 2S+1 consecutive points.
TEST(EpsStar, FullCycleOptimum) {
  for (auto [n, S] : std::vector<std::pair<int, int>>{{12, 1}, {16, 2}}) {
    auto space = bfs_metric(cycle_graph(n));
    auto C = ball(space, 0, n);
    auto r = eps_star(C, 1, S);
    EXPECT_EQ(*r.exact_value, Rational(2, 2 * S + 1)) << n << " " << S;
    ASSERT_TRUE(r.witness);
    auto rep = check_witness(space, *r.witness, 1, *r.exact_value, S);
    EXPECT_TRUE(rep.passed);
  }
}

TEST(EpsStar, WitnessAttainsOptimumOnRandomInstances) {
  std::mt19937 rng(11);
  for (int trial = 0; trial < 15; ++trial) {
    Graph g = random_connected(rng, 5 + static_cast<int>(rng() % 5), static_cast<int>(rng() % 4));
    auto space = bfs_metric(g);
    auto C = make_subset(space, random_subset(rng, g.vertex_count(), 2 + static_cast<int>(rng() % 4)));
    int R = 1 + static_cast<int>(rng() % 2), S = static_cast<int>(rng() % 3);
    auto r = eps_star(C, R, S);
    ASSERT_TRUE(r.witness);
    auto rep = check_witness(space, *r.witness, R, *r.exact_value, S);
    EXPECT_TRUE(rep.passed);
    EXPECT_EQ(rep.max_variation, *r.exact_value);
  }
}

TEST(EpsStar, ZeroOnceSupportCoversDiameter) {
  std::mt19937 rng(5);
  for (int trial = 0; trial < 10; ++trial) {
    Graph g = random_connected(rng, 4 + static_cast<int>(rng() % 8), static_cast<int>(rng() % 5));
    auto space = bfs_metric(g);
    auto C = make_subset(space, random_subset(rng, g.vertex_count(), 2 + static_cast<int>(rng() % 3)));
    auto r = eps_star(C, 2, C.diameter);
    EXPECT_EQ(*r.exact_value, 0);
  }
}

TEST(EpsStar, MonotoneInSAndR) {
  std::mt19937 rng(23);
  for (int trial = 0; trial < 6; ++trial) {
    Graph g = random_connected(rng, 6 + static_cast<int>(rng() % 4), static_cast<int>(rng() % 4));
    auto space = bfs_metric(g);
    auto C = make_subset(space, random_subset(rng, g.vertex_count(), 3 + static_cast<int>(rng() % 2)));
    Rational prev = 3;
    for (int S = 0; S <= 3; ++S) {
      Rational v = *eps_star(C, 1, S).exact_value;
      EXPECT_LE(v, prev);
      EXPECT_GE(v, 0);
      EXPECT_LE(v, 2);
      prev = v;
    }
    Rational low = -1;
    for (int R = 0; R <= 3; ++R) {
      Rational v = *eps_star(C, R, 1).exact_value;
      EXPECT_GE(v, low);
      low = v;
    }
  }
}

TEST(EpsStar, SubsetMonotoneInAmbientMode) {
  auto space = bfs_metric(cycle_graph(10));
  auto big = make_subset(space, {0, 1, 2, 3, 4, 5});
  auto small = make_subset(space, {1, 2, 3});
  EXPECT_LE(*eps_star(small, 1, 1).exact_value, *eps_star(big, 1, 1).exact_value);
}

TEST(EpsStar, IntrinsicNeverBelowAmbient) {
  auto space = bfs_metric(cycle_graph(10));
  auto C = make_subset(space, {0, 1, 2, 3});
  EpsStarOptions intr;
  intr.support = SupportMode::Intrinsic;
  auto a = *eps_star(C, 1, 1).exact_value;
  auto i = *eps_star(C, 1, 1, intr).exact_value;
  EXPECT_GE(i, a);
  auto w = eps_star(C, 1, 1, intr).witness;
  for (const auto& m : w->measures)
    for (const auto& [z, mass] : m) EXPECT_TRUE(C.contains(z));
}

TEST(EpsStar, FloatBracketContainsExact) {
  std::mt19937 rng(3);
  for (int trial = 0; trial < 10; ++trial) {
    Graph g = random_connected(rng, 6 + static_cast<int>(rng() % 5), static_cast<int>(rng() % 5));
    auto space = bfs_metric(g);
    auto C = make_subset(space, random_subset(rng, g.vertex_count(), 3 + static_cast<int>(rng() % 3)));
    auto ex = eps_star(C, 1, 1);
    auto fl = eps_star(C, 1, 1, float_opts());
    EXPECT_NEAR(fl.value, ex.value, 1e-6);
    EXPECT_LE(fl.lower, *ex.exact_value);
    EXPECT_GE(fl.upper, *ex.exact_value);
    EXPECT_LT(Rational(fl.upper - fl.lower).get_d(), 1e-6);
  }
}

TEST(EpsStar, RejectsOversizedExactProgram) {
  auto space = bfs_metric(cycle_graph(60));
  EpsStarOptions o;
  o.max_exact_variables = 100;
  try {
    eps_star(ball(space, 0, 60), 1, 2, o);
    FAIL();
  } catch (const Rejection& e) {
    EXPECT_NE(std::string(e.what()).find("too large"), std::string::npos);
  }
}

TEST(Oracle, DoubleDescriptionSquare) {
  // 0 <= x, y <= 1.
  DoubleDescription dd(2, 4);
  dd.add_inequality({-1, 0}, 0);
  dd.add_inequality({0, -1}, 0);
  dd.add_inequality({1, 0}, 1);
  dd.add_inequality({0, 1}, 1);
  EXPECT_EQ(dd.vertices().size(), 4u);
}

TEST(Oracle, MatchesSmallCases) {
  auto k3 = bfs_metric(complete_graph(3));
  EXPECT_EQ(oracle_eps_star(make_subset(k3, {0, 1, 2}), 1, 0).value, 2);
  EXPECT_EQ(oracle_eps_star(make_subset(k3, {1}), 1, 0).value, 0);
  auto p4 = bfs_metric(path_graph(4));
  auto C = ball(p4, 0, 3);
  EXPECT_EQ(oracle_eps_star(C, 1, 1).value, *eps_star(C, 1, 1).exact_value);
}

TEST(Oracle, AgreesWithSimplexOnRandomSubsets) {
  std::mt19937 rng(17);
  int compared = 0;
  for (int trial = 0; trial < 25; ++trial) {
    Graph g = random_connected(rng, 5 + static_cast<int>(rng() % 4), static_cast<int>(rng() % 3));
    auto space = bfs_metric(g);
    auto C = make_subset(space, random_subset(rng, g.vertex_count(), 2 + static_cast<int>(rng() % 3)));
    int R = 1 + static_cast<int>(rng() % 2), S = static_cast<int>(rng() % 2);
    for (auto mode : {SupportMode::Ambient, SupportMode::Intrinsic}) {
      EpsStarOptions o;
      o.support = mode;
      Rational lp_value = *eps_star(C, R, S, o).exact_value;
      try {
        EXPECT_EQ(oracle_eps_star(C, R, S, mode).value, lp_value);
        ++compared;
      } catch (const Rejection&) {
      }
    }
  }
  EXPECT_GT(compared, 30);
}

TEST(Oracle, CycleSevenMatchesFormula) {
  auto space = bfs_metric(cycle_graph(7));
  EXPECT_EQ(oracle_eps_star(ball(space, 0, 7), 1, 1).value, Rational(2, 3));
}

TEST(Oracle, RejectsLargeInstances) {
  auto space = bfs_metric(cycle_graph(30));
  EXPECT_THROW(oracle_eps_star(ball(space, 0, 30), 1, 2), Rejection);
}
