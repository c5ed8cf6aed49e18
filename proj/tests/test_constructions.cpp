#include <gtest/gtest.h>

#include <random>
#include <set>

#include "coarse/cover.hpp"
#include "coarse/fibred.hpp"
#include "coarse/folner.hpp"

using namespace coarse;

namespace {

// |A sym-diff B| / |A| by listing lattice points.
Rational brute_deficiency(const FolnerSet& F, const std::vector<long>& g) {
  std::set<std::vector<long>> a, b;
  for (const auto& p : F.points()) {
    a.insert(p);
    auto q = p;
    for (std::size_t k = 0; k < q.size(); ++k) q[k] += g[k];
    b.insert(q);
  }
  long diff = 0;
  for (const auto& p : a) diff += b.count(p) ? 0 : 1;
  for (const auto& p : b) diff += a.count(p) ? 0 : 1;
  return make_rational(diff, static_cast<long>(a.size()));
}

CoarseUnion cycles_family(std::vector<int> sizes) {
  std::vector<Graph> blocks;
  for (int n : sizes) blocks.push_back(cycle_graph(n));
  return CoarseUnion(std::move(blocks));
}

CoarseUnion cage_family() {
  std::vector<Graph> blocks;
  for (const char* name : {"petersen", "heawood", "mcgee", "tutte-coxeter"}) blocks.push_back(named_cage(name));
  return CoarseUnion(std::move(blocks));
}

// Non-backtracking closed walks at v of exactly the given length.
std::vector<Walk> closed_walks(const Graph& g, int v, int length) {
  std::vector<Walk> out;
  std::vector<Walk> frontier{{v}};
  for (int step = 0; step < length; ++step) {
    std::vector<Walk> next;
    for (const auto& w : frontier)
      for (int u : g.neighbors(w.back()))
        if (w.size() < 2 || u != w[w.size() - 2]) {
          auto e = w;
          e.push_back(u);
          next.push_back(std::move(e));
        }
    frontier.swap(next);
  }
  for (auto& w : frontier)
    if (w.back() == v) out.push_back(std::move(w));
  return out;
}

// Node of the line cover of C_n at signed position p (base 0).
int line_node(const TreeLift& t, int n, int p) {
  Walk w{0};
  for (int k = 1; k <= std::abs(p); ++k) w.push_back((((p > 0 ? k : -k) % n) + n) % n);
  return *t.find(w);
}

}  // namespace

// ---------------------------------------------------------------------------
// Folner sets

TEST(Folner, DeficiencyExamples) {
  EXPECT_EQ(folner_deficiency(make_box(1, 16), {2}), Rational(1, 4));
  EXPECT_EQ(folner_deficiency(make_box(1, 16), {0}), 0);
  EXPECT_EQ(folner_deficiency(make_box(2, 4), {1, 0}), Rational(1, 2));
}

TEST(Folner, DeficiencyMatchesPointCount) {
  std::mt19937 rng(2);
  for (int trial = 0; trial < 30; ++trial) {
    int d = 1 + static_cast<int>(rng() % 3);
    FolnerSet F;
    std::vector<long> g;
    for (int k = 0; k < d; ++k) {
      F.lower.push_back(static_cast<long>(rng() % 7) - 3);
      F.sides.push_back(1 + static_cast<long>(rng() % 5));
      g.push_back(static_cast<long>(rng() % 9) - 4);
    }
    EXPECT_EQ(folner_deficiency(F, g), brute_deficiency(F, g));
  }
}

TEST(Folner, ProjectionOnCycle) {
  auto q = zd_quotient(1, 32);
  auto F = make_box(1, 8);
  for (int x = 0; x < 32; ++x) {
    auto f = folner_project(F, q, x);
    ASSERT_EQ(f.size(), 8u);
    Rational total = 0;
    for (const auto& [y, m] : f) {
      EXPECT_EQ(m, Rational(1, 8));
      total += m;
    }
    EXPECT_EQ(total, 1);
    auto next = folner_project(F, q, q.target().right_multiply(x, 0));
    EXPECT_EQ(l1_distance(f, next), Rational(1, 4));
  }
}

TEST(Folner, BoxCoveringTheQuotientIsConstant) {
  auto q = zd_quotient(1, 8);
  auto F = make_box(1, 8);
  auto f0 = folner_project(F, q, 0);
  for (int x = 1; x < 8; ++x) EXPECT_EQ(l1_distance(f0, folner_project(F, q, x)), 0);
}

TEST(Folner, ProjectedFamilyMatchesDeficiency) {
  for (int d : {1, 2}) {
    const int m = d == 1 ? 48 : 16;
    const int k = d == 1 ? 8 : 3;
    auto q = zd_quotient(d, m);
    auto F = make_box(d, k);
    auto block = bfs_metric(cayley_graph(q.target()));
    auto w = folner_witness(F, q, 2);
    auto rep = check_witness(block, w, 2, make_rational(2 * 2, k), F.diameter());
    if (d == 1) {
      EXPECT_TRUE(rep.passed);
    }
    for (int x = 0; x < q.target().order(); x += 5) {
      for (int s = 0; s < q.source().generator_count(); ++s) {
        int y = q.target().right_multiply(x, s);
        std::vector<long> g(static_cast<std::size_t>(d), 0);
        g[static_cast<std::size_t>(s / 2)] = s % 2 == 0 ? 1 : -1;
        EXPECT_EQ(l1_distance(w.at(x), w.at(y)), folner_deficiency(F, g));
      }
    }
  }
}

TEST(Folner, RejectsFreeQuotient) {
  auto q = free_quotient(1, GroupDesc::cyclic(5));
  EXPECT_THROW(folner_project(make_box(1, 3), q, 0), Rejection);
  EXPECT_THROW(folner_project(make_box(2, 3), zd_quotient(1, 9), 0), Rejection);
}

TEST(EllInfty, UniformNormExamples) {
  auto one = EllInftyMeasure::from_points({{0, {Rational(3, 10), Rational(7, 10)}}});
  EXPECT_EQ(uniform_norm(one), Rational(7, 10));
  auto two = EllInftyMeasure::from_points({{0, {Rational(1), Rational(0)}}, {1, {Rational(0), Rational(1)}}});
  EXPECT_EQ(uniform_norm(two), 1);
  EXPECT_EQ(uniform_distance(two, two), 0);
  EXPECT_TRUE(unnormalized_indices(two).empty());
  EXPECT_EQ(unnormalized_indices(one), (std::vector<int>{0, 1}));
}

// ---------------------------------------------------------------------------
// Universal covers

TEST(TreeLift, Sizes) {
  auto line = tree_lift(cycle_graph(6), 0, 4);
  EXPECT_EQ(line.size(), 9);
  for (int v = 0; v < line.size(); ++v) EXPECT_LE(line.neighbors(v).size(), 2u);
  EXPECT_EQ(tree_lift(named_cage("petersen"), 0, 2).size(), 10);
  EXPECT_EQ(tree_lift(complete_graph(4), 0, 1).size(), 4);
  auto t = tree_lift(named_cage("heawood"), 3, 5);
  EXPECT_EQ(t.size(), 1 + 3 * 31);
  EXPECT_TRUE(t.verify());
}

TEST(TreeLift, RejectsLeaves) {
  try {
    tree_lift(path_graph(4), 0, 2);
    FAIL();
  } catch (const Rejection& e) {
    EXPECT_NE(std::string(e.what()).find("degree at least 2"), std::string::npos);
  }
  EXPECT_THROW(tree_lift(cycle_graph(5), 0, 0), Rejection);
}

TEST(TreeLift, ProjectionIsHomomorphism) {
  for (const auto& name : cage_names()) {
    auto t = tree_lift(named_cage(name), 0, 4);
    for (int v = 1; v < t.size(); ++v) EXPECT_TRUE(t.base_graph().adjacent(t.project(v), t.project(t.parent(v))));
  }
}

TEST(TreeLift, LocalIsometryBelowHalfGirth) {
  for (const auto& name : cage_names()) {
    Graph g = named_cage(name);
    const int gir = *girth(g);
    auto metric = bfs_metric(g);
    auto t = tree_lift(g, 0, 8);
    for (int r = 1; 2 * r < gir; ++r) {
      for (int node : {0, 1, 5}) {
        auto iso = check_local_isometry(t, metric, node, r);
        EXPECT_TRUE(iso.injective && iso.onto_ball && iso.radial) << name << " r=" << r;
        EXPECT_EQ(iso.pairwise, 4 * r <= gir) << name << " r=" << r;
      }
    }
  }
}

TEST(TreeWitness, LineCoverNeighbors) {
  for (int n : {1, 2, 5}) {
    auto t = tree_lift(cycle_graph(12), 0, 20);
    auto w = tree_ray_witness(t, n, 6);
    for (int x : w.points)
      for (int y : w.points)
        if (t.distance(x, y) == 1) {
          EXPECT_EQ(l1_distance(w.at(x), w.at(y)), make_rational(2, n));
        }
  }
}

TEST(TreeWitness, BoundOnCageCovers) {
  for (const auto& name : cage_names()) {
    for (int n : {2, 4}) {
      auto t = tree_lift(named_cage(name), 0, 3 + n);
      auto w = tree_ray_witness(t, n, 3);
      for (std::size_t i = 0; i < w.points.size(); ++i) {
        EXPECT_EQ(w.measures[i].size(), static_cast<std::size_t>(n));
        for (std::size_t j = i + 1; j < w.points.size(); ++j) {
          int d = t.distance(w.points[i], w.points[j]);
          if (d <= 3) {
            EXPECT_LE(l1_distance(w.measures[i], w.measures[j]), make_rational(2 * d, n));
          }
        }
      }
      EXPECT_TRUE(check_witness(t, w, 1, make_rational(2, n), n - 1).passed);
    }
  }
}

TEST(TreeWitness, SegmentEscapingTruncationIsRejected) {
  auto t = tree_lift(named_cage("petersen"), 0, 4);
  try {
    tree_ray_witness(t, 4, 3);
    FAIL();
  } catch (const Rejection& e) {
    EXPECT_NE(std::string(e.what()).find("truncation radius"), std::string::npos);
  }
}

TEST(Deck, CycleTranslation) {
  auto t = tree_lift(cycle_graph(16), 0, 20);
  auto g = deck_align(t, line_node(t, 16, 3), line_node(t, 16, 19));
  EXPECT_EQ(g.translation_length(), 16);
  EXPECT_EQ(walk_length(g.loop), 16);
  for (int p = -4; p <= 4; ++p) EXPECT_EQ(*g.apply(line_node(t, 16, p)), line_node(t, 16, p + 16));
  EXPECT_FALSE(g.apply(line_node(t, 16, 5)));
}

TEST(Deck, IdentityAndUniqueness) {
  auto t = tree_lift(named_cage("petersen"), 0, 6);
  EXPECT_TRUE(deck_align(t, 7, 7).is_identity());
  // All lifts of one vertex, seen from a fixed lift, give distinct elements.
  std::set<Walk> seen;
  int count = 0;
  for (int v = 0; v < t.size(); ++v) {
    if (t.project(v) != t.project(4) || t.depth(v) > 4) continue;
    ++count;
    seen.insert(deck_align(t, 4, v).loop);
  }
  EXPECT_GT(count, 1);
  EXPECT_EQ(seen.size(), static_cast<std::size_t>(count));
}

TEST(Deck, PetersenFiveCycle) {
  Graph g = named_cage("petersen");
  auto t = tree_lift(g, 0, 7);
  auto loops = closed_walks(g, 0, 5);
  ASSERT_FALSE(loops.empty());
  int lift2 = *t.find(loops.front());
  auto d = deck_align(t, 0, lift2);
  EXPECT_EQ(d.translation_length(), 5);
  EXPECT_FALSE(d.map.empty());
  for (const auto& [p, q] : d.map) EXPECT_EQ(t.project(p), t.project(q));
}

TEST(Deck, CompositionConsistency) {
  Graph g = named_cage("heawood");
  auto t = tree_lift(g, 0, 8);
  std::vector<int> lifts;
  for (int v = 0; v < t.size() && lifts.size() < 3; ++v)
    if (t.project(v) == 2 && t.depth(v) <= 4) lifts.push_back(v);
  ASSERT_EQ(lifts.size(), 3u);
  auto ab = deck_align(t, lifts[0], lifts[1]);
  auto bc = deck_align(t, lifts[1], lifts[2]);
  auto ac = deck_align(t, lifts[0], lifts[2]);
  auto composed = compose(t, bc, ab);
  EXPECT_EQ(composed.loop, ac.loop);
  for (const auto& [p, q] : ac.map)
    if (auto r = composed.apply(p)) {
      EXPECT_EQ(*r, q);
    }
}

// ---------------------------------------------------------------------------
// Fibred data

TEST(Fibred, SegmentLengthAndExclusion) {
  auto data = assemble_fibred(cycles_family({8, 16, 32, 64}), 1, Rational(1, 4));
  EXPECT_EQ(data.n, 8);
  EXPECT_EQ(data.S, 7);
  EXPECT_EQ(data.excluded_blocks(1), (std::vector<int>{0, 1}));
  EXPECT_EQ(data.excluded_blocks(3), (std::vector<int>{0, 1}));
  EXPECT_EQ(detail::segment_length(2, Rational(1, 2)), 8);
  EXPECT_EQ(detail::segment_length(1, Rational(2)), 1);
  EXPECT_EQ(detail::segment_length(1, Rational(3, 10)), 7);
}

TEST(Fibred, RejectsBadInput) {
  EXPECT_THROW(assemble_fibred(cycles_family({8}), 1, Rational(0)), Rejection);
  EXPECT_THROW(assemble_fibred(CoarseUnion({path_graph(3)}), 1, Rational(1)), Rejection);
  EXPECT_THROW(assemble_fibred(cycles_family({16, 8}), 1, Rational(1)), Rejection);
}

TEST(Fibred, XiIsNormalizedPerIndex) {
  auto data = assemble_fibred(cycles_family({8, 32}), 1, Rational(1, 4));
  for (int p = 0; p < data.family.size(); ++p) EXPECT_TRUE(unnormalized_indices(data.xi(p)).empty());
  EXPECT_EQ(data.blocks[0].indices.front(), Walk{0});
}

TEST(Fibred, CyclesFamilyPassesAllConditions) {
  auto data = assemble_fibred(cycles_family({8, 16, 32, 64}), 1, Rational(1, 4));
  for (int L : {1, 2, 3}) {
    auto rep = check_fibred(data, L);
    EXPECT_TRUE(rep.passed) << "L=" << L << " " << (rep.violations.empty() ? "" : rep.violations[0].detail);
    EXPECT_GE(rep.overlap_pairs, 10u);
    EXPECT_GT(rep.checks[4], 0u);
    EXPECT_EQ(rep.max_variation, Rational(1, 4));
  }
}

TEST(Fibred, DiracDataAtEpsTwo) {
  auto data = assemble_fibred(cycles_family({8, 16}), 1, Rational(2));
  EXPECT_EQ(data.n, 1);
  EXPECT_EQ(data.S, 0);
  for (int L : {1, 2, 3}) EXPECT_TRUE(check_fibred(data, L).passed);
}

TEST(Fibred, CageFamily) {
  auto data = assemble_fibred(cage_family(), 1, Rational(1));
  EXPECT_EQ(data.n, 2);
  EXPECT_EQ(data.S, 1);
  EXPECT_TRUE(data.excluded_blocks(1).empty());
  EXPECT_EQ(data.excluded_blocks(2), (std::vector<int>{0, 1, 2, 3}));
  auto rep = check_fibred(data, 1);
  EXPECT_TRUE(rep.passed) << (rep.violations.empty() ? "" : rep.violations[0].detail);
}

// With only girth <= 2(L+S) excluded, McGee (girth 7) and Tutte-Coxeter
// (girth 8) stay in at L = 2, and radius-2 balls around a short cycle give
// a non-constant overlap cocycle.
TEST(Fibred, ProofExclusionRuleMissesCocycleFailure) {
  FibredOptions opt;
  opt.rule = ExclusionRule::Proof;
  opt.L_values = {2};
  auto data = assemble_fibred(cage_family(), 1, Rational(1), opt);
  EXPECT_EQ(data.excluded_blocks(2), (std::vector<int>{0, 1}));
  auto rep = check_fibred(data, 2);
  EXPECT_FALSE(rep.condition_passed[4]);
  EXPECT_TRUE(rep.condition_passed[0] && rep.condition_passed[1] && rep.condition_passed[2] &&
              rep.condition_passed[3]);
}

TEST(Fibred, TamperedNormalizationFailsOnlyConditionTwo) {
  auto data = assemble_fibred(cycles_family({8, 16, 32, 64}), 1, Rational(1, 4));
  // Remove delta from both ends of one segment: neighbor l1 distances are
  // unchanged, the coordinate total is not.
  const int x = data.family.global(2, 5);
  auto& m = data.blocks[2].xi[5].coords[0];
  ASSERT_EQ(m.size(), 8u);
  const Rational delta(1, 100);
  const int far = (5 + (data.family.local(m.front().first) == 5 ? 7 : -7) + 32) % 32;
  for (auto& [z, mass] : m)
    if (z == x || z == data.family.global(2, far)) mass -= delta;
  auto rep = check_fibred(data, 2);
  EXPECT_FALSE(rep.condition_passed[1]);
  for (int c : {0, 2, 3, 4}) EXPECT_TRUE(rep.condition_passed[static_cast<std::size_t>(c)]) << "condition " << c + 1;
}

TEST(Fibred, TamperedSupportAndPermutation) {
  auto data = assemble_fibred(cycles_family({32, 64}), 1, Rational(1, 4));
  auto& m = data.blocks[0].xi[0].coords[0];
  m.back().first = data.family.global(0, 16);
  std::sort(m.begin(), m.end());
  EXPECT_FALSE(check_fibred(data, 1).condition_passed[0]);

  auto clean = assemble_fibred(cycles_family({32, 64}), 1, Rational(1, 4));
  auto& perm = clean.trivializations[1][3].perm[0];
  perm[1] = perm[0] >= 0 ? perm[0] : 0;
  perm[0] = perm[1];
  EXPECT_FALSE(check_fibred(clean, 1).condition_passed[2]);
}

TEST(Fibred, TamperedCocycle) {
  auto data = assemble_fibred(cycles_family({32}), 1, Rational(1, 4));
  const auto& co = data.cocycles[2].front();
  auto& t2 = data.trivializations[2][static_cast<std::size_t>(co.second)];
  const int x = co.common.back();
  auto& perm = t2.perm[static_cast<std::size_t>(t2.position(x))];
  std::rotate(perm.begin(), perm.begin() + 1, perm.end());
  auto rep = check_fibred(data, 2);
  EXPECT_FALSE(rep.condition_passed[4]);
}

TEST(Fibred, ExtractionPassesAndIsDominated) {
  auto data = assemble_fibred(cycles_family({8, 16, 32, 64}), 1, Rational(1, 4));
  auto C = block_ball(data.family, data.family.global(3, 10), 2);
  auto w = fibred_to_local(data, C);
  auto rep = check_witness(data.family, w, 1, Rational(1, 4), 7);
  EXPECT_TRUE(rep.passed);
  auto t = trivialize(data, C.members, C.members.front(), C.diameter);
  for (std::size_t i = 0; i < C.members.size(); ++i)
    for (std::size_t j = i + 1; j < C.members.size(); ++j)
      EXPECT_LE(l1_distance(w.measures[i], w.measures[j]),
                trivialized_distance(data, t, static_cast<int>(i), static_cast<int>(j)));

  auto single = fibred_to_local(data, block_ball(data.family, data.family.global(3, 0), 0));
  EXPECT_TRUE(check_witness(data.family, single, 1, Rational(1, 4), 7).passed);
}

TEST(Fibred, ExtractionRejectsExcludedBlock) {
  auto data = assemble_fibred(cycles_family({8, 16, 32, 64}), 1, Rational(1, 4));
  try {
    fibred_to_local(data, block_ball(data.family, 0, 1));
    FAIL();
  } catch (const Rejection& e) {
    EXPECT_NE(std::string(e.what()).find("K_"), std::string::npos);
  }
}
