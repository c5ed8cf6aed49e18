#pragma once

#include <chrono>
#include <cstddef>
#include <vector>

#include "coarse/lp_model.hpp"
#include "coarse/rational.hpp"

namespace coarse::lp {

namespace detail {

// Dense rational tableau, two phases, Bland's rule throughout.
// Rows 0..m-1 are constraints, row m holds reduced costs; column `rhs`
// holds basic values (and minus the objective in row m).
class RationalTableau {
 public:
  explicit RationalTableau(const StandardForm& sf) : m_(sf.rows) {
    // One identity column per row: the existing +1 slack or a new artificial.
    identity_ = sf.identity_col;
    int cols = sf.cols;
    first_artificial_ = cols;
    for (int i = 0; i < m_; ++i) {
      if (identity_[i] < 0) identity_[i] = cols++;
    }
    n_ = cols;
    rhs_ = n_;
    t_.assign(static_cast<std::size_t>(m_ + 1), std::vector<Rational>(static_cast<std::size_t>(n_ + 1)));
    for (int i = 0; i < m_; ++i) {
      for (const auto& [j, a] : sf.row_terms[i]) t_[i][j] = a;
      if (identity_[i] >= first_artificial_) t_[i][identity_[i]] = 1;
      t_[i][rhs_] = sf.b[i];
    }
    basis_ = identity_;
    active_.assign(static_cast<std::size_t>(m_), true);
  }

  // Returns false when infeasible.
  bool phase_one(const SolveOptions& opt) {
    bool any = false;
    for (int i = 0; i < m_; ++i) {
      if (basis_[i] < first_artificial_) continue;
      any = true;
      for (int j = 0; j <= n_; ++j) {
        if (j >= first_artificial_ && j < n_) continue;
        if (t_[i][j] != 0) t_[m_][j] -= t_[i][j];
      }
    }
    if (!any) return true;
    run(opt, /*allow_artificial=*/false);
    if (t_[m_][rhs_] != 0) return false;
    // Drive zero-level artificials out of the basis, drop redundant rows.
    for (int i = 0; i < m_; ++i) {
      if (basis_[i] < first_artificial_) continue;
      int q = -1;
      for (int j = 0; j < first_artificial_; ++j) {
        if (t_[i][j] != 0) {
          q = j;
          break;
        }
      }
      if (q >= 0) {
        pivot(i, q);
      } else {
        active_[i] = false;
      }
    }
    return true;
  }

  // Returns false when unbounded.
  bool phase_two(const StandardForm& sf, const SolveOptions& opt) {
    for (int j = 0; j <= n_; ++j) t_[m_][j] = (j < sf.cols) ? sf.c[j] : Rational(0);
    for (int i = 0; i < m_; ++i) {
      if (!active_[i]) continue;
      const Rational cb = basis_[i] < sf.cols ? sf.c[basis_[i]] : Rational(0);
      if (cb == 0) continue;
      for (int j = 0; j <= n_; ++j) {
        if (t_[i][j] != 0) t_[m_][j] -= cb * t_[i][j];
      }
    }
    return run(opt, false);
  }

  long pivots() const { return pivots_; }

  std::vector<Rational> primal(int structural_cols) const {
    std::vector<Rational> x(static_cast<std::size_t>(structural_cols));
    for (int i = 0; i < m_; ++i) {
      if (active_[i] && basis_[i] < structural_cols) x[basis_[i]] = t_[i][rhs_];
    }
    return x;
  }

  // Multipliers of the standard-form rows: y_i = -(reduced cost of the
  // identity column of row i), the identity column having zero cost.
  std::vector<Rational> duals() const {
    std::vector<Rational> y(static_cast<std::size_t>(m_));
    for (int i = 0; i < m_; ++i) y[i] = -t_[m_][identity_[i]];
    return y;
  }

 private:
  // Simplex loop with Bland's rule. Returns false on unboundedness.
  bool run(const SolveOptions& opt, bool allow_artificial) {
    const int limit = allow_artificial ? n_ : first_artificial_;
    Rational ratio, best;
    while (true) {
      int q = -1;
      for (int j = 0; j < limit; ++j) {
        if (t_[m_][j] < 0) {
          q = j;
          break;
        }
      }
      if (q < 0) return true;
      int r = -1;
      for (int i = 0; i < m_; ++i) {
        if (!active_[i] || t_[i][q] <= 0) continue;
        ratio = t_[i][rhs_] / t_[i][q];
        if (r < 0 || ratio < best || (ratio == best && basis_[i] < basis_[r])) {
          r = i;
          best = ratio;
        }
      }
      if (r < 0) return false;
      pivot(r, q);
      if (pivots_ > opt.max_pivots) throw Rejection("exact simplex exceeded the pivot limit");
    }
  }

  void pivot(int r, int q) {
    ++pivots_;
    auto& prow = t_[r];
    const Rational inv = 1 / prow[q];
    nz_.clear();
    for (int j = 0; j <= n_; ++j) {
      if (prow[j] != 0) {
        prow[j] *= inv;
        nz_.push_back(j);
      }
    }
    for (int i = 0; i <= m_; ++i) {
      if (i == r) continue;
      auto& row = t_[i];
      if (row[q] == 0) continue;
      factor_ = row[q];
      for (int j : nz_) {
        mpq_mul(tmp_.get_mpq_t(), factor_.get_mpq_t(), prow[j].get_mpq_t());
        mpq_sub(row[j].get_mpq_t(), row[j].get_mpq_t(), tmp_.get_mpq_t());
      }
    }
    basis_[r] = q;
  }

  int m_ = 0, n_ = 0, rhs_ = 0, first_artificial_ = 0;
  std::vector<std::vector<Rational>> t_;
  std::vector<int> basis_, identity_;
  std::vector<bool> active_;
  std::vector<int> nz_;
  Rational factor_, tmp_;
  long pivots_ = 0;
};

}  // namespace detail

// Exact simplex over the rationals.
inline Solution solve_exact(const LPInstance& lp, const SolveOptions& opt = {}) {
  auto start = std::chrono::steady_clock::now();
  StandardForm sf = standardize(lp);
  detail::RationalTableau tab(sf);
  Solution sol;
  sol.mode = NumericMode::Exact;
  auto finish = [&](Status s) {
    sol.status = s;
    sol.pivots = tab.pivots();
    sol.runtime_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    return sol;
  };
  if (!tab.phase_one(opt)) return finish(Status::Infeasible);
  if (!tab.phase_two(sf, opt)) return finish(Status::Unbounded);

  auto xs = tab.primal(sf.cols);
  const int nv = lp.num_variables();
  sol.exact_x.resize(static_cast<std::size_t>(nv));
  sol.x.resize(static_cast<std::size_t>(nv));
  Rational value = 0;
  for (int j = 0; j < nv; ++j) {
    Rational v = sf.shift[j] + xs[sf.pos_col[j]];
    if (sf.neg_col[j] >= 0) v -= xs[sf.neg_col[j]];
    value += lp.costs()[j] * v;
    sol.x[j] = v.get_d();
    sol.exact_x[j] = std::move(v);
  }
  auto y = tab.duals();
  sol.exact_duals.assign(static_cast<std::size_t>(lp.num_constraints()), 0);
  sol.duals.assign(static_cast<std::size_t>(lp.num_constraints()), 0);
  for (int i = 0; i < sf.rows; ++i) {
    int orig = sf.original_row[i];
    if (orig < 0) continue;
    sol.exact_duals[orig] = sf.row_sign[i] * y[i];
    sol.duals[orig] = sol.exact_duals[orig].get_d();
  }
  sol.value = value.get_d();
  sol.exact_value = std::move(value);
  return finish(Status::Optimal);
}

}  // namespace coarse::lp
