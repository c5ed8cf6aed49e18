#pragma once

#include <gmpxx.h>

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "coarse/error.hpp"
#include "coarse/metric.hpp"
#include "coarse/rational.hpp"
#include "coarse/witness.hpp"

namespace coarse {

// Vertex enumeration of a polyhedron {v : A v <= b} by the double
// description method on the homogenized cone {(v, l) : A v - b l <= 0,
// l >= 0}. Integer arithmetic throughout; rays are kept primitive.
class DoubleDescription {
 public:
  using Vec = std::vector<mpz_class>;

  // dim = number of coordinates of v; constraints given as (a, b) with
  // integer entries.
  DoubleDescription(int dim, std::size_t constraint_count)
      : dim_(dim + 1), words_((constraint_count + 1 + 63) / 64) {
    for (int k = 0; k < dim_; ++k) {
      Vec e(static_cast<std::size_t>(dim_), 0);
      e[static_cast<std::size_t>(k)] = 1;
      lineality_.push_back(std::move(e));
    }
    Vec lam(static_cast<std::size_t>(dim_), 0);
    lam.back() = -1;
    add(lam);  // l >= 0
  }

  void add_inequality(const std::vector<long>& a, long b) {
    Vec h(static_cast<std::size_t>(dim_));
    for (std::size_t k = 0; k + 1 < h.size(); ++k) h[k] = a[k];
    h.back() = -b;
    add(h);
  }

  struct Vertex {
    std::vector<Rational> point;
  };

  // Points of the polyhedron's vertices; recession rays are dropped.
  std::vector<Vertex> vertices() const {
    if (!lineality_.empty()) throw Rejection("polyhedron has lines; no vertices");
    std::vector<Vertex> out;
    for (const auto& v : rays_) {
      const mpz_class& lam = v.back();
      if (lam <= 0) continue;
      Vertex vx;
      for (std::size_t k = 0; k + 1 < v.size(); ++k) {
        Rational q(v[k], lam);
        q.canonicalize();
        vx.point.push_back(std::move(q));
      }
      out.push_back(std::move(vx));
    }
    return out;
  }

  std::size_t ray_count() const { return rays_.size(); }
  std::size_t peak_rays() const { return peak_; }

 private:
  // Tight-constraint sets live in one flat array, words_ words per ray.
  std::uint64_t* tight(std::size_t r) { return tight_.data() + r * words_; }
  const std::uint64_t* tight(std::size_t r) const { return tight_.data() + r * words_; }
  static void set_bit(std::uint64_t* b, std::size_t i) { b[i / 64] |= std::uint64_t{1} << (i % 64); }

  static mpz_class dot(const Vec& a, const Vec& b) {
    mpz_class s = 0;
    for (std::size_t k = 0; k < a.size(); ++k)
      if (a[k] != 0 && b[k] != 0) s += a[k] * b[k];
    return s;
  }

  static void make_primitive(Vec& v) {
    mpz_class g = 0;
    for (const auto& x : v) {
      if (x != 0) mpz_gcd(g.get_mpz_t(), g.get_mpz_t(), x.get_mpz_t());
    }
    if (g > 1)
      for (auto& x : v) mpz_divexact(x.get_mpz_t(), x.get_mpz_t(), g.get_mpz_t());
  }

  void add(const Vec& h) {
    const std::size_t idx = index_++;
    std::size_t pivot = lineality_.size();
    mpz_class sp;
    for (std::size_t k = 0; k < lineality_.size(); ++k) {
      sp = dot(h, lineality_[k]);
      if (sp != 0) {
        pivot = k;
        break;
      }
    }
    if (pivot < lineality_.size()) {
      // The constraint cuts a line: project everything onto h = 0 along it
      // and keep the half-line with h < 0 as a new ray.
      Vec l = lineality_[pivot];
      lineality_.erase(lineality_.begin() + static_cast<long>(pivot));
      const int sg = sgn(sp);
      const mpz_class abs_sp = abs(sp);
      for (auto& m : lineality_) {
        mpz_class s = dot(h, m);
        if (s == 0) continue;
        for (std::size_t k = 0; k < m.size(); ++k) m[k] = sp * m[k] - s * l[k];
        make_primitive(m);
      }
      for (std::size_t r = 0; r < rays_.size(); ++r) {
        mpz_class s = dot(h, rays_[r]);
        if (s != 0) {
          for (std::size_t k = 0; k < rays_[r].size(); ++k) rays_[r][k] = abs_sp * rays_[r][k] - sg * s * l[k];
          make_primitive(rays_[r]);
        }
        set_bit(tight(r), idx);
      }
      if (sg > 0)
        for (auto& x : l) x = -x;
      make_primitive(l);
      rays_.push_back(std::move(l));
      tight_.resize(rays_.size() * words_, 0);
      std::uint64_t* t = tight(rays_.size() - 1);
      for (std::size_t k = 0; k < idx; ++k) set_bit(t, k);
      peak_ = std::max(peak_, rays_.size());
      return;
    }

    const std::size_t nr = rays_.size();
    std::vector<mpz_class> s(nr);
    std::vector<std::size_t> pos, neg;
    for (std::size_t k = 0; k < nr; ++k) {
      s[k] = dot(h, rays_[k]);
      if (s[k] > 0) {
        pos.push_back(k);
      } else if (s[k] < 0) {
        neg.push_back(k);
      } else {
        set_bit(tight(k), idx);
      }
    }
    if (pos.empty()) return;
    const std::size_t pointed_dim = static_cast<std::size_t>(dim_) - lineality_.size();
    const std::size_t need = pointed_dim >= 2 ? pointed_dim - 2 : 0;
    std::vector<Vec> fresh;
    std::vector<std::uint64_t> fresh_tight;
    std::vector<std::uint64_t> z(words_);
    // Rays tight on each constraint; a ray blocking (p, n) is tight on all
    // of T_p & T_n, so it suffices to scan the shortest of these lists.
    std::vector<std::vector<std::uint32_t>> on(idx);
    for (std::size_t k = 0; k < nr; ++k) {
      const std::uint64_t* tk = tight(k);
      for (std::size_t w = 0; w < words_; ++w)
        for (std::uint64_t bits = tk[w]; bits; bits &= bits - 1) {
          std::size_t c = w * 64 + static_cast<std::size_t>(__builtin_ctzll(bits));
          if (c < idx) on[c].push_back(static_cast<std::uint32_t>(k));
        }
    }
    for (std::size_t p : pos) {
      const std::uint64_t* tp = tight(p);
      std::size_t last_blocker = nr;  // blockers tend to repeat for a fixed p
      for (std::size_t n : neg) {
        const std::uint64_t* tn = tight(n);
        std::size_t count = 0;
        for (std::size_t w = 0; w < words_; ++w) {
          z[w] = tp[w] & tn[w];
          count += static_cast<std::size_t>(__builtin_popcountll(z[w]));
        }
        if (count < need) continue;
        const std::vector<std::uint32_t>* shortest = nullptr;
        for (std::size_t w = 0; w < words_; ++w)
          for (std::uint64_t bits = z[w]; bits; bits &= bits - 1) {
            const auto& list = on[w * 64 + static_cast<std::size_t>(__builtin_ctzll(bits))];
            if (!shortest || list.size() < shortest->size()) shortest = &list;
          }
        auto blocks = [&](std::size_t k) {
          if (k == p || k == n) return false;
          const std::uint64_t* tk = tight(k);
          for (std::size_t w = 0; w < words_; ++w)
            if (z[w] & ~tk[w]) return false;
          return true;
        };
        bool adjacent = true;
        if (last_blocker < nr && blocks(last_blocker)) {
          adjacent = false;
        } else if (shortest) {
          for (std::uint32_t k : *shortest) {
            if (blocks(k)) {
              adjacent = false;
              last_blocker = k;
              break;
            }
          }
        } else if (nr > 2) {
          adjacent = false;  // Z empty: every other ray contains it
        }
        if (!adjacent) continue;
        Vec r(static_cast<std::size_t>(dim_));
        const mpz_class a = s[p], b = -s[n];
        for (std::size_t k = 0; k < r.size(); ++k) r[k] = a * rays_[n][k] + b * rays_[p][k];
        make_primitive(r);
        fresh.push_back(std::move(r));
        set_bit(z.data(), idx);
        fresh_tight.insert(fresh_tight.end(), z.begin(), z.end());
      }
    }
    std::vector<Vec> next;
    std::vector<std::uint64_t> next_tight;
    next.reserve(nr - pos.size() + fresh.size());
    for (std::size_t k = 0; k < nr; ++k) {
      if (s[k] > 0) continue;
      next.push_back(std::move(rays_[k]));
      next_tight.insert(next_tight.end(), tight(k), tight(k) + words_);
    }
    for (auto& r : fresh) next.push_back(std::move(r));
    next_tight.insert(next_tight.end(), fresh_tight.begin(), fresh_tight.end());
    rays_.swap(next);
    tight_.swap(next_tight);
    peak_ = std::max(peak_, rays_.size());
  }

  int dim_;
  std::size_t words_;
  std::size_t index_ = 0;
  std::vector<Vec> lineality_;
  std::vector<Vec> rays_;
  std::vector<std::uint64_t> tight_;
  std::size_t peak_ = 0;
};

struct OracleResult {
  Rational value;
  std::size_t vertices = 0;
  std::size_t constraints = 0;
  std::size_t variables = 0;
};

inline constexpr std::size_t kOracleMaxVariables = 40;

// eps*(C; R, S) by enumerating the vertices of the feasible region in the
// (f, t) variables and minimizing t over them. The l1 bound is written
// without auxiliary variables: for probability measures,
// |f_x - f_y|_1 = 2 max_{A in supp f_x} (f_x(A) - f_y(A)), so the
// constraints are 2 (f_x(A) - f_y(A)) <= t over nonempty A. Equalities are
// eliminated by solving for the last mass of each measure.
template <FiniteMetric Space>
OracleResult oracle_eps_star(const SubsetView<Space>& C, int R, int S, SupportMode support = SupportMode::Ambient,
                             std::size_t max_variables = kOracleMaxVariables) {
  if (C.ambient == nullptr || C.members.empty()) throw Rejection("oracle needs a nonempty subset");
  const Space& space = *C.ambient;
  const auto& pts = C.members;
  const std::size_t n = pts.size();
  std::vector<std::vector<int>> supp(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (support == SupportMode::Ambient) {
      supp[i] = detail::ambient_ball_points(space, pts[i], S);
    } else {
      for (int z : pts)
        if (space.distance(pts[i], z) <= S) supp[i].push_back(z);
    }
  }
  std::size_t fvars = 0;
  for (const auto& s : supp) fvars += s.size();
  OracleResult out;
  out.variables = fvars + 1;
  if (out.variables > max_variables) {
    throw Rejection("oracle size bound exceeded: " + std::to_string(out.variables) + " LP variables (f and t) > " +
                    std::to_string(max_variables));
  }

  // Free coordinates: all but the last mass of each measure, then t.
  std::vector<int> first(n);
  int dim = 0;
  for (std::size_t i = 0; i < n; ++i) {
    first[i] = dim;
    dim += static_cast<int>(supp[i].size()) - 1;
  }
  const int t = dim++;

  // Affine form of f_x(z): coefficient vector plus constant.
  struct Affine {
    std::vector<long> a;
    long c = 0;
  };
  auto mass = [&](std::size_t i, std::size_t k) {
    Affine e{std::vector<long>(static_cast<std::size_t>(dim), 0), 0};
    if (k + 1 < supp[i].size()) {
      e.a[static_cast<std::size_t>(first[i]) + k] = 1;
    } else {
      e.c = 1;
      for (std::size_t q = 0; q + 1 < supp[i].size(); ++q) e.a[static_cast<std::size_t>(first[i]) + q] = -1;
    }
    return e;
  };

  // rows a.v <= b, each tagged with the largest point index it involves;
  // feeding them in tag order keeps the intermediate cones small.
  std::vector<std::pair<std::vector<long>, long>> rows;
  std::vector<std::size_t> tag;
  {
    std::vector<long> a(static_cast<std::size_t>(dim), 0);
    a[static_cast<std::size_t>(t)] = -1;
    rows.emplace_back(a, 0);  // t >= 0
    tag.push_back(0);
  }
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < supp[i].size(); ++k) {
      auto e = mass(i, k);
      for (auto& x : e.a) x = -x;
      rows.emplace_back(std::move(e.a), e.c);  // -f <= 0
      tag.push_back(i);
    }
  const std::size_t row_bound = 200000;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (space.distance(pts[i], pts[j]) > R) continue;
      const auto& si = supp[i];
      if (si.size() >= 20) throw Rejection("oracle: support of size " + std::to_string(si.size()) + " too large");
      // index of each z in supp_j, or -1
      std::vector<int> in_j(si.size(), -1);
      for (std::size_t k = 0; k < si.size(); ++k) {
        auto it = std::lower_bound(supp[j].begin(), supp[j].end(), si[k]);
        if (it != supp[j].end() && *it == si[k]) in_j[k] = static_cast<int>(it - supp[j].begin());
      }
      for (unsigned long mask = 1; mask < (1ul << si.size()); ++mask) {
        Affine e{std::vector<long>(static_cast<std::size_t>(dim), 0), 0};
        for (std::size_t k = 0; k < si.size(); ++k) {
          if (!(mask >> k & 1ul)) continue;
          auto fx = mass(i, k);
          for (std::size_t q = 0; q < e.a.size(); ++q) e.a[q] += 2 * fx.a[q];
          e.c += 2 * fx.c;
          if (in_j[k] >= 0) {
            auto fy = mass(j, static_cast<std::size_t>(in_j[k]));
            for (std::size_t q = 0; q < e.a.size(); ++q) e.a[q] -= 2 * fy.a[q];
            e.c -= 2 * fy.c;
          }
        }
        e.a[static_cast<std::size_t>(t)] -= 1;
        rows.emplace_back(std::move(e.a), -e.c);
        tag.push_back(j);
        if (rows.size() > row_bound) throw Rejection("oracle: more than " + std::to_string(row_bound) + " constraints");
      }
    }
  }
  std::vector<std::size_t> order(rows.size());
  for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return tag[a] < tag[b]; });
  // Drop exact duplicates, keeping the first occurrence.
  std::set<std::pair<std::vector<long>, long>> seen;
  std::vector<std::pair<std::vector<long>, long>> unique_rows;
  for (std::size_t k : order)
    if (seen.insert(rows[k]).second) unique_rows.push_back(std::move(rows[k]));
  out.constraints = unique_rows.size();

  DoubleDescription dd(dim, unique_rows.size());
  for (const auto& [a, b] : unique_rows) dd.add_inequality(a, b);
  auto verts = dd.vertices();
  out.vertices = verts.size();
  if (verts.empty()) throw Rejection("oracle: empty polyhedron");
  out.value = verts.front().point[static_cast<std::size_t>(t)];
  for (const auto& v : verts) out.value = std::min(out.value, v.point[static_cast<std::size_t>(t)]);
  return out;
}

}  // namespace coarse
