#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdlib>
#include <string>
#include <vector>

#include "coarse/error.hpp"
#include "coarse/quotient.hpp"
#include "coarse/rational.hpp"
#include "coarse/witness.hpp"

namespace coarse {

// Box F = prod [lower_k, lower_k + sides_k) in Z^d.
struct FolnerSet {
  std::vector<long> lower;
  std::vector<long> sides;

  int dimension() const { return static_cast<int>(sides.size()); }

  long size() const {
    long s = 1;
    for (long m : sides) s *= m;
    return s;
  }

  // l1 diameter, the support radius of projected measures.
  int diameter() const {
    long d = 0;
    for (long m : sides) d += m - 1;
    return static_cast<int>(d);
  }

  // Lattice points in lexicographic order.
  std::vector<std::vector<long>> points() const {
    std::vector<std::vector<long>> out;
    std::vector<long> p = lower;
    const int d = dimension();
    while (true) {
      out.push_back(p);
      int k = d - 1;
      while (k >= 0 && ++p[k] == lower[k] + sides[k]) {
        p[k] = lower[k];
        --k;
      }
      if (k < 0) return out;
    }
  }
};

inline FolnerSet make_box(int d, long side, long lower = 0) {
  if (d < 1) throw Rejection("box dimension must be >= 1");
  if (side < 1) throw Rejection("box side must be >= 1, got " + std::to_string(side));
  return {std::vector<long>(static_cast<std::size_t>(d), lower), std::vector<long>(static_cast<std::size_t>(d), side)};
}

// |F sym-diff (g + F)| / |F|, from |F cap (g+F)| = prod max(0, m_k - |g_k|).
inline Rational folner_deficiency(const FolnerSet& F, const std::vector<long>& g) {
  if (static_cast<int>(g.size()) != F.dimension()) throw Rejection("translation has the wrong dimension");
  long overlap = 1;
  for (std::size_t k = 0; k < g.size(); ++k) overlap *= std::max(0L, F.sides[k] - std::labs(g[k]));
  return make_rational(2 * (F.size() - overlap), F.size());
}

namespace detail {

inline void require_zd(const FolnerSet& F, const QuotientMap& q) {
  if (q.source().kind != SourceGroup::Kind::Zd) throw Rejection("Folner projection needs a Z^d quotient");
  if (q.source().rank != F.dimension()) {
    throw Rejection("box dimension " + std::to_string(F.dimension()) + " differs from the source rank " +
                    std::to_string(q.source().rank));
  }
}

// Order of generator e_k in the target, i.e. the k-th modulus.
inline std::vector<long> zd_moduli(const QuotientMap& q) {
  const auto& G = q.target();
  std::vector<long> out;
  for (int k = 0; k < q.source().rank; ++k) {
    long m = 1;
    for (int x = G.generator(2 * k); x != G.identity(); x = G.right_multiply(x, 2 * k)) ++m;
    out.push_back(m);
  }
  return out;
}

}  // namespace detail

// f_x(y) = |q^{-1}(y) cap (g_x + F)| / |F| with g_x the representative of x
// whose coordinates lie in [0, m_k). Points are target element indices.
inline Measure folner_project(const FolnerSet& F, const QuotientMap& q, int x) {
  detail::require_zd(F, q);
  const auto& G = q.target();
  if (x < 0 || x >= G.order()) throw Rejection("point " + std::to_string(x) + " is not in the block");
  const auto moduli = detail::zd_moduli(q);
  const ElementKey& gx = G.key(x);
  std::vector<long> count(static_cast<std::size_t>(G.order()), 0);
  ElementKey key(gx.size());
  for (const auto& p : F.points()) {
    for (std::size_t k = 0; k < key.size(); ++k) {
      long v = (gx[k] + p[k]) % moduli[k];
      key[k] = static_cast<int>(v < 0 ? v + moduli[k] : v);
    }
    ++count[static_cast<std::size_t>(G.find(key))];
  }
  Measure m;
  for (int y = 0; y < G.order(); ++y)
    if (count[y] > 0) m.emplace_back(y, make_rational(count[y], F.size()));
  return m;
}

// Projected family over every point of the block, with S the box diameter.
inline WitnessFamily folner_witness(const FolnerSet& F, const QuotientMap& q, int R) {
  WitnessFamily w{R, F.diameter(), {}, {}};
  for (int x = 0; x < q.target().order(); ++x) {
    w.points.push_back(x);
    w.measures.push_back(folner_project(F, q, x));
  }
  return w;
}

// ---------------------------------------------------------------------------
// l-infinity valued measures

// xi: point y -> vector over a finite index set I, stored per index:
// coords[i] is the measure y -> xi_y(i).
struct EllInftyMeasure {
  std::vector<Measure> coords;

  std::size_t index_count() const { return coords.size(); }

  // Builds from per-point vectors, all of length |I|.
  static EllInftyMeasure from_points(const std::vector<std::pair<int, std::vector<Rational>>>& rows) {
    EllInftyMeasure xi;
    if (rows.empty()) return xi;
    const std::size_t k = rows.front().second.size();
    xi.coords.resize(k);
    auto sorted = rows;
    std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    for (const auto& [y, v] : sorted) {
      if (v.size() != k) throw Rejection("l-infinity measure rows have different lengths");
      for (std::size_t i = 0; i < k; ++i)
        if (v[i] != 0) xi.coords[i].emplace_back(y, v[i]);
    }
    return xi;
  }
};

// sup_i sum_y |xi_y(i)|.
inline Rational uniform_norm(const EllInftyMeasure& xi) {
  Rational best = 0;
  for (const auto& m : xi.coords) {
    Rational s = 0;
    for (const auto& [y, v] : m) s += abs(v);
    best = std::max(best, s);
  }
  return best;
}

// |a - b|_u over indices present in both.
inline Rational uniform_distance(const EllInftyMeasure& a, const EllInftyMeasure& b) {
  if (a.index_count() != b.index_count()) throw Rejection("l-infinity measures over different index sets");
  Rational best = 0;
  for (std::size_t i = 0; i < a.index_count(); ++i) best = std::max(best, l1_distance(a.coords[i], b.coords[i]));
  return best;
}

// Indices i with sum_y xi_y(i) != 1.
inline std::vector<int> unnormalized_indices(const EllInftyMeasure& xi) {
  std::vector<int> out;
  for (std::size_t i = 0; i < xi.coords.size(); ++i) {
    Rational s = 0;
    for (const auto& [y, v] : xi.coords[i]) s += v;
    if (s != 1) out.push_back(static_cast<int>(i));
  }
  return out;
}

}  // namespace coarse
