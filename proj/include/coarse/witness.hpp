#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

#include "coarse/error.hpp"
#include "coarse/lp.hpp"
#include "coarse/metric.hpp"
#include "coarse/rational.hpp"

namespace coarse {

// Finitely supported measure: (point, mass) sorted by point.
using Measure = std::vector<std::pair<int, Rational>>;

// Sum over the union of supports of |a(z) - b(z)|.
inline Rational l1_distance(const Measure& a, const Measure& b) {
  Rational total = 0;
  std::size_t i = 0, j = 0;
  while (i < a.size() || j < b.size()) {
    if (j == b.size() || (i < a.size() && a[i].first < b[j].first)) {
      total += abs(a[i++].second);
    } else if (i == a.size() || b[j].first < a[i].first) {
      total += abs(b[j++].second);
    } else {
      total += abs(a[i].second - b[j].second);
      ++i;
      ++j;
    }
  }
  return total;
}

inline Measure dirac(int z) { return {{z, Rational(1)}}; }

inline Measure uniform_measure(const std::vector<int>& points) {
  Measure m;
  Rational w(1, static_cast<long>(points.size()));
  for (int p : points) m.emplace_back(p, w);
  std::sort(m.begin(), m.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  return m;
}

// {f_x} indexed by the points of a subset C.
struct WitnessFamily {
  int R = 0;
  int S = 0;
  std::vector<int> points;        // sorted
  std::vector<Measure> measures;  // parallel to points

  const Measure& at(int x) const {
    auto it = std::lower_bound(points.begin(), points.end(), x);
    if (it == points.end() || *it != x) throw Rejection("witness has no measure at point " + std::to_string(x));
    return measures[static_cast<std::size_t>(it - points.begin())];
  }
};

enum class ViolationKind { Normalization, Negative, Support, Variation };

inline const char* to_string(ViolationKind k) {
  switch (k) {
    case ViolationKind::Normalization: return "normalization";
    case ViolationKind::Negative: return "negative-mass";
    case ViolationKind::Support: return "support";
    case ViolationKind::Variation: return "variation";
  }
  return "?";
}

struct Violation {
  ViolationKind kind;
  int x = -1;
  int y = -1;         // partner point (variation) or offending support point
  Rational measured;  // total mass, mass, distance, or l1 distance
  Rational bound;

  std::string describe() const {
    std::string s = to_string(kind);
    switch (kind) {
      case ViolationKind::Normalization:
        return s + ": f_" + std::to_string(x) + " has total mass " + to_string(measured);
      case ViolationKind::Negative:
        return s + ": f_" + std::to_string(x) + "(" + std::to_string(y) + ") = " + to_string(measured);
      case ViolationKind::Support:
        return s + ": f_" + std::to_string(x) + " charges " + std::to_string(y) + " at distance " +
               to_string(measured) + " > S = " + to_string(bound);
      case ViolationKind::Variation:
        return s + ": |f_" + std::to_string(x) + " - f_" + std::to_string(y) + "|_1 = " + to_string(measured) +
               " > eps = " + to_string(bound);
    }
    return s;
  }
};

struct WitnessReport {
  bool passed = true;
  std::vector<Violation> violations;
  Rational max_variation = 0;
  int worst_x = -1, worst_y = -1;
  std::size_t pairs_checked = 0;
};

// Checks the three conditions on {f_x}: probability measures, supports in
// B_x(S), and |f_x - f_y|_1 <= eps whenever d(x, y) <= R. `tolerance`
// relaxes normalization and variation (float witnesses).
template <FiniteMetric Space>
WitnessReport check_witness(const Space& space, const WitnessFamily& w, int R, const Rational& eps, int S,
                            const Rational& tolerance = 0) {
  WitnessReport rep;
  if (w.points.size() != w.measures.size()) throw Rejection("witness points and measures differ in length");
  for (std::size_t i = 0; i < w.points.size(); ++i) {
    const int x = w.points[i];
    Rational total = 0;
    for (const auto& [z, m] : w.measures[i]) {
      total += m;
      if (m < 0) rep.violations.push_back({ViolationKind::Negative, x, z, m, 0});
      if (m != 0) {
        int d = space.distance(x, z);
        if (d > S) rep.violations.push_back({ViolationKind::Support, x, z, Rational(d), Rational(S)});
      }
    }
    if (abs(total - 1) > tolerance) rep.violations.push_back({ViolationKind::Normalization, x, -1, total, 1});
  }
  for (std::size_t i = 0; i < w.points.size(); ++i) {
    for (std::size_t j = i + 1; j < w.points.size(); ++j) {
      if (space.distance(w.points[i], w.points[j]) > R) continue;
      ++rep.pairs_checked;
      Rational v = l1_distance(w.measures[i], w.measures[j]);
      if (v > rep.max_variation || rep.worst_x < 0) {
        rep.max_variation = v;
        rep.worst_x = w.points[i];
        rep.worst_y = w.points[j];
      }
      if (v > eps + tolerance) rep.violations.push_back({ViolationKind::Variation, w.points[i], w.points[j], v, eps});
    }
  }
  rep.passed = rep.violations.empty();
  return rep;
}

// ---------------------------------------------------------------------------
// Optimal variation eps*(C; R, S)

enum class SupportMode { Ambient, Intrinsic };

inline SupportMode parse_support_mode(const std::string& s) {
  if (s == "ambient") return SupportMode::Ambient;
  if (s == "intrinsic") return SupportMode::Intrinsic;
  throw FormatError("support mode must be 'ambient' or 'intrinsic', got '" + s + "'");
}

inline const char* to_string(SupportMode m) { return m == SupportMode::Ambient ? "ambient" : "intrinsic"; }

struct EpsStarOptions {
  lp::NumericMode mode = lp::NumericMode::Exact;
  SupportMode support = SupportMode::Ambient;
  std::size_t max_variables = 250000;
  std::size_t max_exact_variables = 8000;  // dense rational tableau
  bool emit_witness = true;
  lp::SolveOptions solver;
  // Isometries of the ambient space (indexed by ambient point) mapping the
  // subset onto itself. The program is solved over their orbits.
  std::vector<std::vector<int>> symmetries;
};

struct EpsStarStats {
  long pivots = 0;
  double runtime_ms = 0;
  std::size_t variables = 0;
  std::size_t constraints = 0;
  std::size_t nonzeros = 0;
  std::size_t pairs = 0;
  std::size_t symmetries = 0;
  std::string shortcut;  // non-empty when no LP was solved
};

struct EpsStarResult {
  lp::NumericMode mode = lp::NumericMode::Exact;
  double value = 0;
  std::optional<Rational> exact_value;  // exact mode, or a shortcut
  // Certified bracket lower <= eps* <= upper. Exact mode: both equal the
  // optimum. Float mode: lower from the LP duals, upper from the measured
  // variation of the rounded witness.
  Rational lower = 0, upper = 2;
  std::optional<WitnessFamily> witness;
  EpsStarStats stats;

  bool certainly_at_most(const Rational& eps) const { return upper <= eps; }
  bool certainly_above(const Rational& eps) const { return lower > eps; }
};

namespace detail {

template <FiniteMetric Space>
std::vector<int> ambient_ball_points(const Space& space, int center, int radius) {
  if constexpr (std::is_same_v<Space, CoarseUnion>) {
    return block_ball(space, center, radius).members;
  } else {
    std::vector<int> out;
    for (int p = 0; p < space.size(); ++p)
      if (space.distance(center, p) <= radius) out.push_back(p);
    return out;
  }
}

// Rounds a float measure to a nearby exact probability measure: masses
// snapped to multiples of 2^-40, negatives dropped, then renormalized.
inline Measure round_measure(const std::vector<int>& support, const std::vector<double>& mass) {
  Measure m;
  Rational total = 0;
  for (std::size_t k = 0; k < support.size(); ++k) {
    double v = std::ldexp(std::round(std::ldexp(mass[k], 40)), -40);
    if (v <= 0) continue;
    Rational r = from_double(v);
    total += r;
    m.emplace_back(support[k], std::move(r));
  }
  if (m.empty()) {
    // degenerate float output: put all mass on the first admissible point
    m.emplace_back(support.front(), Rational(1));
    return m;
  }
  for (auto& [z, r] : m) r /= total;
  return m;
}

inline Rational witness_variation(const std::vector<std::pair<int, int>>& pairs, const std::vector<Measure>& f) {
  Rational best = 0;
  for (const auto& [i, j] : pairs) best = std::max(best, l1_distance(f[i], f[j]));
  return best;
}

struct UnionFind {
  std::vector<int> parent;
  explicit UnionFind(std::size_t n) : parent(n) {
    for (std::size_t i = 0; i < n; ++i) parent[i] = static_cast<int>(i);
  }
  int find(int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  void unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
};

struct EpsProgram {
  lp::LPInstance lp;
  std::vector<std::vector<int>> fvar;  // variable holding f_i(supp[i][k])
  int t = -1;
};

inline std::vector<lp::Term> merge_terms(std::vector<lp::Term> row) {
  std::sort(row.begin(), row.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  std::vector<lp::Term> out;
  for (auto& [j, a] : row) {
    if (!out.empty() && out.back().first == j) {
      out.back().second += a;
    } else {
      out.emplace_back(j, std::move(a));
    }
  }
  std::erase_if(out, [](const auto& e) { return e.second == 0; });
  return out;
}

inline int position(const std::vector<int>& sorted, int z) {
  auto it = std::lower_bound(sorted.begin(), sorted.end(), z);
  return it != sorted.end() && *it == z ? static_cast<int>(it - sorted.begin()) : -1;
}

// u_xy(z) over unordered pairs, one orientation each.
inline EpsProgram plain_program(const std::vector<std::vector<int>>& supp,
                                const std::vector<std::pair<int, int>>& pairs) {
  EpsProgram P;
  auto& lp = P.lp;
  const std::size_t n = supp.size();
  P.fvar.resize(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < supp[i].size(); ++k) P.fvar[i].push_back(lp.add_variable(0));
  P.t = lp.add_variable(1);
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<lp::Term> row;
    for (int v : P.fvar[i]) row.emplace_back(v, Rational(1));
    lp.add_constraint(std::move(row), lp::Sense::Equal, 1);
  }
  for (const auto& [i, j] : pairs) {
    std::vector<lp::Term> sum;
    for (std::size_t k = 0; k < supp[i].size(); ++k) {
      int u = lp.add_variable(0);
      std::vector<lp::Term> row{{P.fvar[i][k], Rational(1)}, {u, Rational(-1)}};
      int kj = position(supp[j], supp[i][k]);
      if (kj >= 0) row.emplace_back(P.fvar[j][kj], Rational(-1));
      lp.add_constraint(std::move(row), lp::Sense::LessEqual, 0);
      sum.emplace_back(u, Rational(2));
    }
    sum.emplace_back(P.t, Rational(-1));
    lp.add_constraint(std::move(sum), lp::Sense::LessEqual, 0);
  }
  return P;
}

// Same program over ordered pairs, with variables and rows identified
// along the orbits of the given symmetries. Averaging an optimal family
// over the generated group keeps it optimal, so the optimum is unchanged.
inline EpsProgram symmetric_program(const std::vector<int>& pts, const std::vector<std::vector<int>>& supp,
                                    const std::vector<std::pair<int, int>>& pairs,
                                    const std::vector<std::vector<int>>& syms) {
  const std::size_t n = pts.size();
  std::vector<int> f_off(n + 1, 0);
  for (std::size_t i = 0; i < n; ++i) f_off[i + 1] = f_off[i] + static_cast<int>(supp[i].size());
  std::vector<std::pair<int, int>> op;
  for (const auto& [i, j] : pairs) {
    op.emplace_back(i, j);
    op.emplace_back(j, i);
  }
  std::sort(op.begin(), op.end());
  std::vector<int> u_off(op.size() + 1, 0);
  for (std::size_t p = 0; p < op.size(); ++p) u_off[p + 1] = u_off[p] + static_cast<int>(supp[op[p].first].size());
  auto pair_id = [&](int i, int j) {
    auto it = std::lower_bound(op.begin(), op.end(), std::make_pair(i, j));
    return it != op.end() && *it == std::make_pair(i, j) ? static_cast<int>(it - op.begin()) : -1;
  };
  UnionFind uf_x(n), uf_f(static_cast<std::size_t>(f_off[n])), uf_p(op.size()), uf_u(static_cast<std::size_t>(u_off.back()));
  auto reject = [](const std::string& why) { throw Rejection("supplied map is not a symmetry of the subset: " + why); };
  for (const auto& g : syms) {
    auto image = [&](int p) {
      if (p < 0 || p >= static_cast<int>(g.size())) reject("point " + std::to_string(p) + " has no image");
      return g[p];
    };
    std::vector<int> gi(n);
    std::vector<char> hit(n, 0);
    for (std::size_t i = 0; i < n; ++i) {
      gi[i] = position(pts, image(pts[i]));
      if (gi[i] < 0 || hit[gi[i]]) reject("it does not permute the subset");
      hit[gi[i]] = 1;
      uf_x.unite(static_cast<int>(i), gi[i]);
    }
    std::vector<std::vector<int>> gk(n);
    for (std::size_t i = 0; i < n; ++i) {
      if (supp[gi[i]].size() != supp[i].size()) reject("support sizes differ");
      for (int z : supp[i]) {
        int k = position(supp[gi[i]], image(z));
        if (k < 0) reject("it does not map supports onto supports");
        gk[i].push_back(k);
      }
      for (std::size_t k = 0; k < supp[i].size(); ++k) uf_f.unite(f_off[i] + static_cast<int>(k), f_off[gi[i]] + gk[i][k]);
    }
    for (std::size_t p = 0; p < op.size(); ++p) {
      const auto [i, j] = op[p];
      int q = pair_id(gi[i], gi[j]);
      if (q < 0) reject("it does not preserve constrained pairs");
      uf_p.unite(static_cast<int>(p), q);
      for (std::size_t k = 0; k < supp[i].size(); ++k) uf_u.unite(u_off[p] + static_cast<int>(k), u_off[q] + gk[i][k]);
    }
  }

  EpsProgram P;
  auto& lp = P.lp;
  std::vector<int> fv(static_cast<std::size_t>(f_off[n]), -1), uv(static_cast<std::size_t>(u_off.back()), -1);
  for (int e = 0; e < f_off[n]; ++e) fv[e] = uf_f.find(e) == e ? lp.add_variable(0) : fv[uf_f.find(e)];
  for (int e = 0; e < u_off.back(); ++e) uv[e] = uf_u.find(e) == e ? lp.add_variable(0) : uv[uf_u.find(e)];
  P.t = lp.add_variable(1);
  P.fvar.resize(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < supp[i].size(); ++k) P.fvar[i].push_back(fv[f_off[i] + k]);
  for (std::size_t i = 0; i < n; ++i) {
    if (uf_x.find(static_cast<int>(i)) != static_cast<int>(i)) continue;
    std::vector<lp::Term> row;
    for (int v : P.fvar[i]) row.emplace_back(v, Rational(1));
    lp.add_constraint(merge_terms(std::move(row)), lp::Sense::Equal, 1);
  }
  for (std::size_t p = 0; p < op.size(); ++p) {
    const auto [i, j] = op[p];
    for (std::size_t k = 0; k < supp[i].size(); ++k) {
      const int e = u_off[p] + static_cast<int>(k);
      if (uf_u.find(e) != e) continue;
      std::vector<lp::Term> row{{P.fvar[i][k], Rational(1)}, {uv[e], Rational(-1)}};
      int kj = position(supp[j], supp[i][k]);
      if (kj >= 0) row.emplace_back(P.fvar[j][kj], Rational(-1));
      lp.add_constraint(merge_terms(std::move(row)), lp::Sense::LessEqual, 0);
    }
    if (uf_p.find(static_cast<int>(p)) != static_cast<int>(p)) continue;
    std::vector<lp::Term> sum;
    for (std::size_t k = 0; k < supp[i].size(); ++k) sum.emplace_back(uv[u_off[p] + k], Rational(2));
    sum.emplace_back(P.t, Rational(-1));
    lp.add_constraint(merge_terms(std::move(sum)), lp::Sense::LessEqual, 0);
  }
  return P;
}

}  // namespace detail

// Minimum over families {f_x}_{x in C} with Supp f_x in B_x(S) of
// max_{d(x,y) <= R} |f_x - f_y|_1.
//
// LP: variables f_x(z) >= 0 (z in the support set of x), u_xy(z) >= 0 and t;
// sum_z f_x(z) = 1; u_xy(z) >= f_x(z) - f_y(z) for z in supp f_x;
// 2 sum_z u_xy(z) <= t; minimize t. Since both measures have mass 1,
// |f_x - f_y|_1 is twice the positive part of f_x - f_y.
template <FiniteMetric Space>
EpsStarResult eps_star(const SubsetView<Space>& C, int R, int S, const EpsStarOptions& opt = {}) {
  auto start = std::chrono::steady_clock::now();
  if (C.ambient == nullptr || C.members.empty()) throw Rejection("eps_star needs a nonempty subset");
  if (R < 0 || S < 0) throw Rejection("R and S must be >= 0");
  const Space& space = *C.ambient;
  const auto& pts = C.members;
  const std::size_t n = pts.size();

  EpsStarResult res;
  auto check_size = [&](std::size_t nvars) {
    const std::size_t limit = opt.mode == lp::NumericMode::Exact ? opt.max_exact_variables : opt.max_variables;
    if (nvars > limit) {
      throw Rejection("eps_star LP too large: " + std::to_string(nvars) + " variables (" + std::to_string(n) +
                      " points) exceeds the " + (opt.mode == lp::NumericMode::Exact ? "exact" : "float") +
                      " bound of " + std::to_string(limit));
    }
  };
  res.mode = opt.mode;
  auto elapsed = [&] { return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count(); };

  std::vector<std::vector<int>> supp(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (opt.support == SupportMode::Ambient) {
      supp[i] = detail::ambient_ball_points(space, pts[i], S);
    } else {
      for (int z : pts)
        if (space.distance(pts[i], z) <= S) supp[i].push_back(z);
    }
  }
  std::vector<std::pair<int, int>> pairs;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (space.distance(pts[i], pts[j]) <= R) pairs.emplace_back(static_cast<int>(i), static_cast<int>(j));
  res.stats.pairs = pairs.size();

  auto finish_zero = [&](std::string why, std::vector<Measure> f) {
    res.value = 0;
    res.exact_value = Rational(0);
    res.lower = res.upper = 0;
    res.stats.shortcut = std::move(why);
    if (opt.emit_witness) res.witness = WitnessFamily{R, S, pts, std::move(f)};
    res.stats.runtime_ms = elapsed();
    return res;
  };

  if (pairs.empty()) {
    std::vector<Measure> f;
    for (const auto& s : supp) f.push_back(uniform_measure(s));
    return finish_zero("no constrained pairs", std::move(f));
  }
  // A point z with C inside B_z(S) (z in C for intrinsic supports) carries
  // a constant family, variation 0.
  {
    std::vector<int> cand = supp[0];
    for (std::size_t i = 1; i < n && !cand.empty(); ++i) {
      std::vector<int> keep;
      std::set_intersection(cand.begin(), cand.end(), supp[i].begin(), supp[i].end(), std::back_inserter(keep));
      cand.swap(keep);
    }
    if (!cand.empty()) return finish_zero("common center", std::vector<Measure>(n, dirac(cand.front())));
  }

  detail::EpsProgram program;
  if (opt.symmetries.empty()) {
    std::size_t nvars = 1;
    for (std::size_t i = 0; i < n; ++i) nvars += supp[i].size();
    for (const auto& [i, j] : pairs) nvars += supp[i].size();
    check_size(nvars);
    program = detail::plain_program(supp, pairs);
  } else {
    program = detail::symmetric_program(pts, supp, pairs, opt.symmetries);
    check_size(static_cast<std::size_t>(program.lp.num_variables()));
    res.stats.symmetries = opt.symmetries.size();
  }
  const auto& lp = program.lp;
  const int t = program.t;
  res.stats.variables = static_cast<std::size_t>(lp.num_variables());
  res.stats.constraints = static_cast<std::size_t>(lp.num_constraints());
  res.stats.nonzeros = lp.nonzeros();

  auto sol = lp::solve_lp(lp, opt.mode, opt.solver);
  res.stats.pivots = sol.pivots;
  if (sol.status != lp::Status::Optimal) {
    throw Rejection(std::string("eps_star LP solver reported ") + lp::to_string(sol.status) +
                    " on a feasible bounded program (numerical failure)");
  }

  std::vector<Measure> f(n);
  if (opt.mode == lp::NumericMode::Exact) {
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t k = 0; k < supp[i].size(); ++k) {
        const Rational& m = sol.exact_x[static_cast<std::size_t>(program.fvar[i][k])];
        if (m != 0) f[i].emplace_back(supp[i][k], m);
      }
    res.exact_value = *sol.exact_value;
    res.value = sol.value;
    res.lower = res.upper = *sol.exact_value;
  } else {
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<double> mass;
      for (int v : program.fvar[i]) mass.push_back(sol.x[static_cast<std::size_t>(v)]);
      f[i] = detail::round_measure(supp[i], mass);
    }
    res.value = sol.value;
    res.upper = detail::witness_variation(pairs, f);
    // Dual bound: for y with the right signs, c^T x >= y^T b + sum_j
    // min(0, (c - A^T y)_j) * ub_j over the box f, u <= 1, t <= 2 that
    // contains an optimal point.
    const auto& rows = lp.constraints();
    std::vector<Rational> d(static_cast<std::size_t>(lp.num_variables()));
    for (int j = 0; j < lp.num_variables(); ++j) d[j] = lp.costs()[j];
    Rational bound = 0;
    for (std::size_t r = 0; r < rows.size(); ++r) {
      double yd = sol.duals[r];
      if (rows[r].sense == lp::Sense::LessEqual) yd = std::min(0.0, yd);
      if (rows[r].sense == lp::Sense::GreaterEqual) yd = std::max(0.0, yd);
      if (yd == 0) continue;
      Rational y = from_double(yd);
      bound += y * rows[r].rhs;
      for (const auto& [j, a] : rows[r].terms) d[j] -= y * a;
    }
    for (int j = 0; j < lp.num_variables(); ++j)
      if (d[j] < 0) bound += d[j] * (j == t ? Rational(2) : Rational(1));
    res.lower = std::max(Rational(0), bound);
    if (res.lower > res.upper) throw Rejection("eps_star certification failed: dual bound exceeds witness variation");
  }
  if (opt.emit_witness) res.witness = WitnessFamily{R, S, pts, std::move(f)};
  res.stats.runtime_ms = elapsed();
  return res;
}

}  // namespace coarse
