#pragma once

#include <algorithm>
#include <array>
#include <cstddef>
#include <deque>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "coarse/cover.hpp"
#include "coarse/error.hpp"
#include "coarse/folner.hpp"
#include "coarse/metric.hpp"
#include "coarse/rational.hpp"
#include "coarse/witness.hpp"

namespace coarse {

// K_L: the blocks excluded at scale L. Proof: girth <= 2(L+S). Strict also
// excludes girth <= 4L, where two radius-L balls can overlap around a short
// cycle and the overlap cocycle stops being constant.
enum class ExclusionRule { Strict, Proof };

inline const char* to_string(ExclusionRule r) { return r == ExclusionRule::Strict ? "strict" : "proof"; }

struct FibredOptions {
  std::vector<int> L_values{1, 2, 3};
  int loop_bound = 0;  // 0: max(2(L+S) + girth, 2 diam + 2L) over L_values
  ExclusionRule rule = ExclusionRule::Strict;
  std::size_t max_walks = 5000000;  // enumeration budget for the fiber index set
};

struct FibredBlock {
  int girth = 0;
  int base = 0;
  int loop_bound = 0;
  BaseRay ray;
  std::vector<Walk> lifts;    // canonical lift of each vertex: BFS-tree path from the base
  std::vector<Walk> indices;  // fiber index set, identity first, then by length and lexicographically
  std::map<Walk, int> index_of;
  std::vector<EllInftyMeasure> xi;  // per local vertex, coords over indices, global points

  int index(const Walk& w) const {
    auto it = index_of.find(w);
    return it == index_of.end() ? -1 : it->second;
  }
};

// t_C(x) for each x in C = B_center(L): right multiplication of the index
// by h_x^{-1}, where h_x carries the canonical lift of x to its lift inside
// the ball around the canonical lift of the center. perm[j] = t_C(x)(j),
// -1 where the image leaves the truncated index set.
struct Trivialization {
  int block = 0;
  int center = 0;  // global
  int L = 0;
  std::vector<int> points;  // global, sorted
  std::vector<Walk> h;
  std::vector<std::vector<int>> perm;

  int position(int p) const {
    auto it = std::lower_bound(points.begin(), points.end(), p);
    return it != points.end() && *it == p ? static_cast<int>(it - points.begin()) : -1;
  }
};

// t_{C1}(x) o t_{C2}(x)^{-1} is right multiplication by `element`.
struct Cocycle {
  int first = 0, second = 0;  // positions in the trivialization list
  std::vector<int> common;    // C1 cap C2
  Walk element;
};

struct FibredWitnessData {
  CoarseUnion family;
  int R = 1;
  Rational eps;
  int n = 1;
  int S = 0;
  FibredOptions options;
  std::vector<FibredBlock> blocks;
  std::map<int, std::vector<Trivialization>> trivializations;  // by L
  std::map<int, std::vector<Cocycle>> cocycles;               // by L

  bool excluded(int block, int L) const {
    const int g = blocks.at(static_cast<std::size_t>(block)).girth;
    if (g <= 2 * (L + S)) return true;
    return options.rule == ExclusionRule::Strict && g <= 4 * L;
  }

  std::vector<int> excluded_blocks(int L) const {
    std::vector<int> out;
    for (int b = 0; b < family.block_count(); ++b)
      if (excluded(b, L)) out.push_back(b);
    return out;
  }

  const EllInftyMeasure& xi(int p) const {
    return blocks.at(static_cast<std::size_t>(family.block_of(p))).xi.at(static_cast<std::size_t>(family.local(p)));
  }
};

namespace detail {

// Smallest n with 2R/n <= eps.
inline int segment_length(int R, const Rational& eps) {
  Rational q = Rational(2 * R) / eps;
  mpz_class c;
  mpz_cdiv_q(c.get_mpz_t(), q.get_num_mpz_t(), q.get_den_mpz_t());
  if (c < 1) c = 1;
  if (!c.fits_sint_p()) throw Rejection("segment length overflows");
  return static_cast<int>(c.get_si());
}

// BFS-tree paths from source, neighbors taken in index order.
inline std::vector<Walk> bfs_paths(const Graph& g, int source) {
  const int n = g.vertex_count();
  std::vector<int> parent(static_cast<std::size_t>(n), -2);
  parent[static_cast<std::size_t>(source)] = -1;
  std::deque<int> queue{source};
  while (!queue.empty()) {
    int x = queue.front();
    queue.pop_front();
    for (int y : g.neighbors(x)) {
      if (parent[static_cast<std::size_t>(y)] != -2) continue;
      parent[static_cast<std::size_t>(y)] = x;
      queue.push_back(y);
    }
  }
  std::vector<Walk> out(static_cast<std::size_t>(n));
  for (int v = 0; v < n; ++v) {
    for (int u = v; u >= 0; u = parent[static_cast<std::size_t>(u)]) out[static_cast<std::size_t>(v)].push_back(u);
    std::reverse(out[static_cast<std::size_t>(v)].begin(), out[static_cast<std::size_t>(v)].end());
  }
  return out;
}

// Reduced closed walks at base of length <= bound.
inline std::vector<Walk> based_loops(const Graph& g, int base, int bound, std::size_t max_walks) {
  std::vector<Walk> out{{base}};
  Walk w{base};
  std::vector<std::size_t> next{0};
  std::size_t visited = 0;
  while (!next.empty()) {
    const int v = w.back();
    const int prev = w.size() >= 2 ? w[w.size() - 2] : -1;
    const auto& nb = g.neighbors(v);
    std::size_t& i = next.back();
    while (i < nb.size() && nb[i] == prev) ++i;
    if (i == nb.size() || walk_length(w) == bound) {
      w.pop_back();
      next.pop_back();
      continue;
    }
    w.push_back(nb[i++]);
    next.push_back(0);
    if (++visited > max_walks) {
      throw Rejection("fiber index enumeration exceeded " + std::to_string(max_walks) +
                      " walks; lower the loop bound (now " + std::to_string(bound) + ")");
    }
    if (w.back() == base) out.push_back(w);
  }
  std::sort(out.begin(), out.end(), [](const Walk& a, const Walk& b) {
    return a.size() != b.size() ? a.size() < b.size() : a < b;
  });
  return out;
}

inline bool is_injective(const std::vector<int>& perm) {
  std::vector<int> img;
  for (int k : perm)
    if (k >= 0) img.push_back(k);
  std::sort(img.begin(), img.end());
  return std::adjacent_find(img.begin(), img.end()) == img.end();
}

inline std::vector<int> invert(const std::vector<int>& perm) {
  std::vector<int> inv(perm.size(), -1);
  for (std::size_t j = 0; j < perm.size(); ++j)
    if (perm[j] >= 0) inv[static_cast<std::size_t>(perm[j])] = static_cast<int>(j);
  return inv;
}

}  // namespace detail

// t_C(x) for x in `points` (one block), lifting C into the ball around the
// canonical lift of `anchor` along geodesics from the anchor.
inline Trivialization trivialize(const FibredWitnessData& data, std::vector<int> points, int anchor, int L) {
  const int b = data.family.block_of(anchor);
  const FibredBlock& fb = data.blocks.at(static_cast<std::size_t>(b));
  const Graph& g = data.family.block(b);
  const int off = data.family.offset(b);
  auto geo = detail::bfs_paths(g, anchor - off);
  const Walk& c0 = fb.lifts[static_cast<std::size_t>(anchor - off)];
  std::sort(points.begin(), points.end());
  Trivialization t{b, anchor, L, points, {}, {}};
  for (int p : points) {
    if (data.family.block_of(p) != b) throw Rejection("subset meets more than one block");
    Walk lifted = concat(c0, geo[static_cast<std::size_t>(p - off)]);
    Walk h = concat(lifted, reversed(fb.lifts[static_cast<std::size_t>(p - off)]));
    Walk hinv = reversed(h);
    std::vector<int> perm(fb.indices.size(), -1);
    for (std::size_t j = 0; j < fb.indices.size(); ++j) perm[j] = fb.index(concat(fb.indices[j], hinv));
    t.h.push_back(std::move(h));
    t.perm.push_back(std::move(perm));
  }
  return t;
}

// |t_C(x) xi^x - t_C(y) xi^y|_u over the indices where both sides are
// defined; also reports how many such indices there are.
inline Rational trivialized_distance(const FibredWitnessData& data, const Trivialization& t, int i, int j,
                                     std::size_t* common = nullptr) {
  const auto& xi_x = data.xi(t.points[static_cast<std::size_t>(i)]);
  const auto& xi_y = data.xi(t.points[static_cast<std::size_t>(j)]);
  auto inv_x = detail::invert(t.perm[static_cast<std::size_t>(i)]);
  auto inv_y = detail::invert(t.perm[static_cast<std::size_t>(j)]);
  Rational best = 0;
  std::size_t count = 0;
  for (std::size_t k = 0; k < inv_x.size(); ++k) {
    if (inv_x[k] < 0 || inv_y[k] < 0) continue;
    ++count;
    best = std::max(best, l1_distance(xi_x.coords[static_cast<std::size_t>(inv_x[k])],
                                      xi_y.coords[static_cast<std::size_t>(inv_y[k])]));
  }
  if (common) *common = count;
  return best;
}

// xi^x(k) = projection of the segment measure at k . (canonical lift of x),
// with n = ceil(2R/eps) and S = n - 1.
inline FibredWitnessData assemble_fibred(const CoarseUnion& family, int R, const Rational& eps,
                                         const FibredOptions& opt = {}) {
  if (eps <= 0) throw Rejection("eps must be > 0, got " + to_string(eps));
  if (R < 1) throw Rejection("R must be >= 1");
  if (opt.L_values.empty()) throw Rejection("no scales L given");
  FibredWitnessData data;
  data.family = family;
  data.R = R;
  data.eps = eps;
  data.n = detail::segment_length(R, eps);
  data.S = data.n - 1;
  data.options = opt;
  const int Lmax = *std::max_element(opt.L_values.begin(), opt.L_values.end());

  int prev_girth = 0;
  for (int b = 0; b < family.block_count(); ++b) {
    const Graph& g = family.block(b);
    require_min_degree_two(g);
    FibredBlock fb;
    fb.girth = *girth(g);
    if (fb.girth < prev_girth) {
      throw Rejection("blocks must be ordered by non-decreasing girth: block " + std::to_string(b) + " has girth " +
                      std::to_string(fb.girth) + " after " + std::to_string(prev_girth));
    }
    prev_girth = fb.girth;
    fb.loop_bound = opt.loop_bound > 0 ? opt.loop_bound
                                       : std::max(2 * (Lmax + data.S) + fb.girth,
                                                  2 * family.block_diameter(b) + 2 * Lmax);
    fb.ray = BaseRay(std::make_shared<const Graph>(g), fb.base);
    fb.lifts = detail::bfs_paths(g, fb.base);
    fb.indices = detail::based_loops(g, fb.base, fb.loop_bound, opt.max_walks);
    for (std::size_t k = 0; k < fb.indices.size(); ++k) fb.index_of.emplace(fb.indices[k], static_cast<int>(k));
    const int off = family.offset(b);
    const Rational unit(1, data.n);
    for (int x = 0; x < g.vertex_count(); ++x) {
      EllInftyMeasure xi;
      for (const auto& k : fb.indices) {
        auto seg = fb.ray.segment(concat(k, fb.lifts[static_cast<std::size_t>(x)]), data.n);
        std::sort(seg.begin(), seg.end());
        Measure m;
        for (int z : seg) {
          if (!m.empty() && m.back().first == z + off) {
            m.back().second += unit;
          } else {
            m.emplace_back(z + off, unit);
          }
        }
        xi.coords.push_back(std::move(m));
      }
      fb.xi.push_back(std::move(xi));
    }
    data.blocks.push_back(std::move(fb));
  }

  for (int L : opt.L_values) {
    if (L < 0) throw Rejection("L must be >= 0");
    auto& ts = data.trivializations[L];
    auto& cs = data.cocycles[L];
    for (int b = 0; b < family.block_count(); ++b) {
      if (data.excluded(b, L)) continue;
      const std::size_t first = ts.size();
      for (int c = 0; c < family.block_size(b); ++c) {
        const int center = family.global(b, c);
        ts.push_back(trivialize(data, block_ball(family, center, L).members, center, L));
      }
      for (std::size_t i = first; i < ts.size(); ++i) {
        for (std::size_t j = i + 1; j < ts.size(); ++j) {
          Cocycle co{static_cast<int>(i), static_cast<int>(j), {}, {}};
          std::set_intersection(ts[i].points.begin(), ts[i].points.end(), ts[j].points.begin(), ts[j].points.end(),
                                std::back_inserter(co.common));
          if (co.common.empty()) continue;
          const int x = co.common.front();
          co.element = concat(ts[j].h[static_cast<std::size_t>(ts[j].position(x))],
                              reversed(ts[i].h[static_cast<std::size_t>(ts[i].position(x))]));
          cs.push_back(std::move(co));
        }
      }
    }
  }
  return data;
}

struct FibredViolation {
  int condition = 0;  // 1..5
  int center = -1;    // subset C = B_center(L), -1 for per-point conditions
  int x = -1;
  int y = -1;         // partner point, or offending support point
  int index = -1;     // fiber index
  std::string detail;
};

struct FibredReport {
  int L = 0;
  bool passed = true;
  std::array<bool, 5> condition_passed{true, true, true, true, true};
  std::array<std::size_t, 5> checks{};  // evaluations per condition
  std::vector<int> excluded_blocks;
  std::size_t subsets = 0;
  std::size_t overlap_pairs = 0;
  Rational max_variation = 0;
  std::vector<FibredViolation> violations;
};

inline FibredReport check_fibred(const FibredWitnessData& data, int L) {
  auto it = data.trivializations.find(L);
  if (it == data.trivializations.end()) {
    throw Rejection("scale L = " + std::to_string(L) + " was not assembled");
  }
  const auto& ts = it->second;
  const auto& family = data.family;
  FibredReport rep;
  rep.L = L;
  rep.excluded_blocks = data.excluded_blocks(L);
  rep.subsets = ts.size();
  auto flag = [&](FibredViolation v) {
    rep.condition_passed[static_cast<std::size_t>(v.condition - 1)] = false;
    rep.violations.push_back(std::move(v));
  };

  // (1), (2): per point of every admissible block.
  for (int b = 0; b < family.block_count(); ++b) {
    if (data.excluded(b, L)) continue;
    for (int lx = 0; lx < family.block_size(b); ++lx) {
      const int x = family.global(b, lx);
      const auto& xi = data.xi(x);
      for (std::size_t k = 0; k < xi.coords.size(); ++k) {
        Rational total = 0;
        bool negative = false;
        for (const auto& [z, m] : xi.coords[k]) {
          total += m;
          if (m < 0) negative = true;
          ++rep.checks[0];
          if (m != 0 && family.distance(x, z) > data.S) {
            flag({1, -1, x, z, static_cast<int>(k),
                  "xi^x charges a point at distance " + std::to_string(family.distance(x, z)) + " > S = " +
                      std::to_string(data.S)});
          }
        }
        ++rep.checks[1];
        if (total != 1 || negative) {
          flag({2, -1, x, -1, static_cast<int>(k),
                negative ? "negative coordinate" : "coordinate sums to " + to_string(total)});
        }
      }
    }
  }

  for (const auto& t : ts) {
    const int np = static_cast<int>(t.points.size());
    // (3)
    for (int i = 0; i < np; ++i) {
      ++rep.checks[2];
      const auto& perm = t.perm[static_cast<std::size_t>(i)];
      if (!detail::is_injective(perm)) {
        flag({3, t.center, t.points[static_cast<std::size_t>(i)], -1, -1, "t_C(x) is not injective"});
      } else if (std::none_of(perm.begin(), perm.end(), [](int k) { return k == 0; })) {
        flag({3, t.center, t.points[static_cast<std::size_t>(i)], -1, -1,
              "t_C(x) misses the identity index within the truncation"});
      }
    }
    // (4)
    for (int i = 0; i < np; ++i) {
      for (int j = i + 1; j < np; ++j) {
        const int x = t.points[static_cast<std::size_t>(i)], y = t.points[static_cast<std::size_t>(j)];
        if (family.distance(x, y) > data.R) continue;
        ++rep.checks[3];
        std::size_t common = 0;
        Rational v = trivialized_distance(data, t, i, j, &common);
        rep.max_variation = std::max(rep.max_variation, v);
        if (common == 0) {
          flag({4, t.center, x, y, -1, "no common fiber index"});
        } else if (v > data.eps) {
          flag({4, t.center, x, y, -1, "uniform distance " + to_string(v) + " > eps = " + to_string(data.eps)});
        }
      }
    }
  }

  // (5)
  const auto cit = data.cocycles.find(L);
  if (cit != data.cocycles.end()) {
    for (const auto& co : cit->second) {
      ++rep.overlap_pairs;
      const auto& t1 = ts.at(static_cast<std::size_t>(co.first));
      const auto& t2 = ts.at(static_cast<std::size_t>(co.second));
      const auto& fb = data.blocks.at(static_cast<std::size_t>(t1.block));
      std::vector<int> expected(fb.indices.size());
      for (std::size_t k = 0; k < expected.size(); ++k) expected[k] = fb.index(concat(fb.indices[k], co.element));
      std::size_t compared = 0;
      for (int x : co.common) {
        const auto& p1 = t1.perm[static_cast<std::size_t>(t1.position(x))];
        auto inv2 = detail::invert(t2.perm[static_cast<std::size_t>(t2.position(x))]);
        for (std::size_t k = 0; k < inv2.size(); ++k) {
          const int j = inv2[k];
          const int got = j < 0 ? -1 : p1[static_cast<std::size_t>(j)];
          if (got < 0) continue;
          ++compared;
          ++rep.checks[4];
          if (got != expected[k]) {
            flag({5, t1.center, x, t2.center, static_cast<int>(k),
                  "cocycle at x differs from the one at " + std::to_string(co.common.front())});
            break;
          }
        }
      }
      if (compared == 0) flag({5, t1.center, -1, t2.center, -1, "cocycle undetermined within the truncation"});
    }
  }
  rep.passed = rep.violations.empty();
  return rep;
}

// f_x(z) = (t_C(x) xi^x)_z(identity) on an admissible subset C of one block
// (outside K_{L+S} with L the diameter of C).
inline WitnessFamily fibred_to_local(const FibredWitnessData& data, const SubsetView<CoarseUnion>& C) {
  if (C.members.empty()) throw Rejection("fibred_to_local needs a nonempty subset");
  const int b = data.family.block_of(C.members.front());
  for (int p : C.members)
    if (data.family.block_of(p) != b) throw Rejection("subset meets more than one block");
  const int L = C.diameter;
  if (data.excluded(b, L + data.S)) {
    throw Rejection("subset lies in block " + std::to_string(b) + " (girth " +
                    std::to_string(data.blocks[static_cast<std::size_t>(b)].girth) + "), which belongs to K_" +
                    std::to_string(L + data.S) + " (L = " + std::to_string(L) + ", S = " + std::to_string(data.S) +
                    ")");
  }
  const auto t = trivialize(data, C.members, C.members.front(), L);
  const auto& fb = data.blocks[static_cast<std::size_t>(b)];
  WitnessFamily w{data.R, data.S, t.points, {}};
  for (std::size_t i = 0; i < t.points.size(); ++i) {
    const int j = fb.index(t.h[i]);
    if (j < 0) {
      throw Rejection("identity coordinate of t_C(x) xi^x lies outside the truncated index set; raise the loop "
                      "bound (now " + std::to_string(fb.loop_bound) + ")");
    }
    w.measures.push_back(data.xi(t.points[i]).coords[static_cast<std::size_t>(j)]);
  }
  return w;
}

}  // namespace coarse
