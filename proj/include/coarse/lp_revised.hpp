#pragma once

#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include "coarse/error.hpp"
#include "coarse/lp_model.hpp"

namespace coarse::lp {

namespace detail {

// Revised primal simplex in double precision. The basis is factored with
// Eigen's sparse LU and updated with a product-form eta file between
// refactorizations. Pricing is Dantzig's rule, falling back to Bland's rule
// while pivots stay degenerate.
class RevisedSimplex {
 public:
  RevisedSimplex(const StandardForm& sf, const SolveOptions& opt) : opt_(opt), m_(sf.rows) {
    std::vector<std::vector<std::pair<int, double>>> cols(static_cast<std::size_t>(sf.cols));
    for (int i = 0; i < m_; ++i)
      for (const auto& [j, a] : sf.row_terms[i]) cols[j].emplace_back(i, a.get_d());
    first_artificial_ = sf.cols;
    head_.resize(static_cast<std::size_t>(m_));
    for (int i = 0; i < m_; ++i) {
      if (sf.identity_col[i] >= 0) {
        head_[i] = sf.identity_col[i];
      } else {
        head_[i] = static_cast<int>(cols.size());
        cols.push_back({{i, 1.0}});
      }
    }
    n_ = static_cast<int>(cols.size());
    start_.push_back(0);
    for (const auto& c : cols) {
      for (const auto& [i, a] : c) {
        row_.push_back(i);
        val_.push_back(a);
      }
      start_.push_back(static_cast<int>(row_.size()));
    }
    b_.resize(static_cast<std::size_t>(m_));
    for (int i = 0; i < m_; ++i) b_[i] = sf.b[i].get_d();
    pos_.assign(static_cast<std::size_t>(n_), -1);
    for (int i = 0; i < m_; ++i) pos_[head_[i]] = i;
    structural_cost_.assign(static_cast<std::size_t>(n_), 0.0);
    for (int j = 0; j < sf.cols; ++j) structural_cost_[j] = sf.c[j].get_d();
  }

  bool phase_one() {
    cost_.assign(static_cast<std::size_t>(n_), 0.0);
    bool any = false;
    for (int j = first_artificial_; j < n_; ++j) {
      cost_[j] = 1.0;
      any = true;
    }
    refactor();
    if (!any) return true;
    phase_ = 1;
    iterate();
    double infeas = 0, scale = 1;
    for (int i = 0; i < m_; ++i) {
      if (head_[i] >= first_artificial_) infeas += std::max(0.0, xb_[i]);
      scale = std::max(scale, std::abs(b_[i]));
    }
    if (infeas > 1e-7 * scale) return false;
    drive_out_artificials();
    return true;
  }

  bool phase_two() {
    phase_ = 2;
    cost_ = structural_cost_;
    bool bounded = iterate();
    refactor();
    return bounded;
  }

  long pivots() const { return pivots_; }

  std::vector<double> primal(int structural_cols) const {
    std::vector<double> x(static_cast<std::size_t>(structural_cols), 0.0);
    for (int i = 0; i < m_; ++i)
      if (head_[i] < structural_cols) x[head_[i]] = std::max(0.0, xb_[i]);
    return x;
  }

  std::vector<double> duals() {
    std::vector<double> cb(static_cast<std::size_t>(m_));
    for (int i = 0; i < m_; ++i) cb[i] = cost_[head_[i]];
    return btran(cb);
  }

 private:
  using SpMat = Eigen::SparseMatrix<double>;

  struct Eta {
    int r;
    double pivot;
    std::vector<int> idx;
    std::vector<double> val;
  };

  void refactor() {
    std::vector<Eigen::Triplet<double>> trips;
    for (int i = 0; i < m_; ++i) {
      int j = head_[i];
      for (int k = start_[j]; k < start_[j + 1]; ++k) trips.emplace_back(row_[k], i, val_[k]);
    }
    SpMat basis(m_, m_);
    basis.setFromTriplets(trips.begin(), trips.end());
    basis.makeCompressed();
    lu_.analyzePattern(basis);
    lu_.factorize(basis);
    if (lu_.info() != Eigen::Success) throw Rejection("float simplex: basis matrix became singular");
    etas_.clear();
    Eigen::Map<const Eigen::VectorXd> bv(b_.data(), m_);
    Eigen::VectorXd x = lu_.solve(bv);
    xb_.assign(x.data(), x.data() + m_);
  }

  std::vector<double> ftran_column(int j) const {
    Eigen::VectorXd a = Eigen::VectorXd::Zero(m_);
    for (int k = start_[j]; k < start_[j + 1]; ++k) a[row_[k]] = val_[k];
    Eigen::VectorXd x = lu_.solve(a);
    std::vector<double> out(x.data(), x.data() + m_);
    apply_etas(out);
    return out;
  }

  void apply_etas(std::vector<double>& x) const {
    for (const auto& e : etas_) {
      double xr = x[e.r] / e.pivot;
      if (xr != 0.0) {
        for (std::size_t k = 0; k < e.idx.size(); ++k) x[e.idx[k]] -= e.val[k] * xr;
      }
      x[e.r] = xr;
    }
  }

  std::vector<double> btran(std::vector<double> v) {
    for (auto it = etas_.rbegin(); it != etas_.rend(); ++it) {
      double s = v[it->r];
      for (std::size_t k = 0; k < it->idx.size(); ++k) s -= it->val[k] * v[it->idx[k]];
      v[it->r] = s / it->pivot;
    }
    Eigen::Map<const Eigen::VectorXd> vv(v.data(), m_);
    Eigen::VectorXd y = lu_.transpose().solve(vv);
    return {y.data(), y.data() + m_};
  }

  double reduced_cost(int j, const std::vector<double>& y) const {
    double d = cost_[j];
    for (int k = start_[j]; k < start_[j + 1]; ++k) d -= y[row_[k]] * val_[k];
    return d;
  }

  bool may_enter(int j) const { return pos_[j] < 0 && j < first_artificial_; }

  // Returns false on unboundedness.
  bool iterate() {
    const double tol = opt_.tolerance;
    int degenerate_run = 0;
    while (true) {
      std::vector<double> cb(static_cast<std::size_t>(m_));
      for (int i = 0; i < m_; ++i) cb[i] = cost_[head_[i]];
      auto y = btran(cb);
      const bool bland = opt_.bland_after_degenerate == 0 || degenerate_run >= opt_.bland_after_degenerate;
      int q = -1;
      double best = -tol;
      for (int j = 0; j < n_; ++j) {
        if (!may_enter(j)) continue;
        double d = reduced_cost(j, y);
        if (d < best) {
          q = j;
          best = d;
          if (bland) break;
        }
      }
      if (q < 0) return true;

      auto alpha = ftran_column(q);
      int r = choose_leaving(alpha, bland);
      if (r < 0) return false;

      double theta = std::max(0.0, xb_[r] / alpha[r]);
      if (head_[r] >= first_artificial_ && phase_ == 2) theta = 0.0;
      for (int i = 0; i < m_; ++i) {
        if (alpha[i] != 0.0) xb_[i] -= theta * alpha[i];
      }
      xb_[r] = theta;
      degenerate_run = theta <= tol ? degenerate_run + 1 : 0;
      replace(r, q, alpha);
      if (++pivots_ > opt_.max_pivots) throw Rejection("float simplex exceeded the pivot limit");
    }
  }

  // Two-pass (Harris) ratio test; plain minimum ratio with lowest-index
  // ties under Bland's rule.
  int choose_leaving(const std::vector<double>& alpha, bool bland) const {
    const double piv_tol = 1e-9;
    const double feas_tol = opt_.tolerance;
    auto blocking = [&](int i) {
      if (head_[i] >= first_artificial_ && phase_ == 2) return std::abs(alpha[i]) > piv_tol;
      return alpha[i] > piv_tol;
    };
    auto ratio = [&](int i) {
      if (head_[i] >= first_artificial_ && phase_ == 2) return 0.0;
      return std::max(0.0, xb_[i]) / alpha[i];
    };
    int r = -1;
    if (bland) {
      double best = std::numeric_limits<double>::infinity();
      for (int i = 0; i < m_; ++i) {
        if (!blocking(i)) continue;
        double t = ratio(i);
        if (r < 0 || t < best - 1e-12 || (t <= best + 1e-12 && head_[i] < head_[r])) {
          r = i;
          best = std::min(best, t);
        }
      }
      return r;
    }
    double bound = std::numeric_limits<double>::infinity();
    for (int i = 0; i < m_; ++i) {
      if (!blocking(i)) continue;
      double t = (head_[i] >= first_artificial_ && phase_ == 2) ? feas_tol / std::abs(alpha[i])
                                                                 : (std::max(0.0, xb_[i]) + feas_tol) / alpha[i];
      bound = std::min(bound, t);
    }
    double best_alpha = 0;
    for (int i = 0; i < m_; ++i) {
      if (!blocking(i) || ratio(i) > bound) continue;
      if (std::abs(alpha[i]) > best_alpha) {
        best_alpha = std::abs(alpha[i]);
        r = i;
      }
    }
    return r;
  }

  void replace(int r, int q, const std::vector<double>& alpha) {
    Eta e{r, alpha[r], {}, {}};
    for (int i = 0; i < m_; ++i) {
      if (i != r && std::abs(alpha[i]) > 1e-14) {
        e.idx.push_back(i);
        e.val.push_back(alpha[i]);
      }
    }
    etas_.push_back(std::move(e));
    pos_[head_[r]] = -1;
    head_[r] = q;
    pos_[q] = r;
    if (static_cast<int>(etas_.size()) >= kRefactorInterval) refactor();
  }

  void drive_out_artificials() {
    for (int r = 0; r < m_; ++r) {
      if (head_[r] < first_artificial_) continue;
      std::vector<double> e(static_cast<std::size_t>(m_), 0.0);
      e[r] = 1.0;
      auto rho = btran(e);
      int q = -1;
      double best = 1e-7;
      for (int j = 0; j < first_artificial_; ++j) {
        if (pos_[j] >= 0) continue;
        double a = 0;
        for (int k = start_[j]; k < start_[j + 1]; ++k) a += rho[row_[k]] * val_[k];
        if (std::abs(a) > best) {
          best = std::abs(a);
          q = j;
        }
      }
      if (q < 0) continue;  // redundant row: the artificial stays basic at zero
      auto alpha = ftran_column(q);
      double theta = xb_[r] / alpha[r];
      for (int i = 0; i < m_; ++i) {
        if (alpha[i] != 0.0) xb_[i] -= theta * alpha[i];
      }
      xb_[r] = theta;
      replace(r, q, alpha);
      ++pivots_;
    }
    refactor();
  }

  static constexpr int kRefactorInterval = 100;

  SolveOptions opt_;
  int m_ = 0, n_ = 0, first_artificial_ = 0, phase_ = 1;
  std::vector<int> start_, row_;
  std::vector<double> val_, b_, cost_, structural_cost_, xb_;
  std::vector<int> head_, pos_;
  std::vector<Eta> etas_;
  Eigen::SparseLU<SpMat, Eigen::COLAMDOrdering<int>> lu_;
  long pivots_ = 0;
};

}  // namespace detail

inline Solution solve_float(const LPInstance& lp, const SolveOptions& opt = {}) {
  auto start = std::chrono::steady_clock::now();
  StandardForm sf = standardize(lp);
  detail::RevisedSimplex rs(sf, opt);
  Solution sol;
  sol.mode = NumericMode::Float;
  auto finish = [&](Status s) {
    sol.status = s;
    sol.pivots = rs.pivots();
    sol.runtime_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    return sol;
  };
  if (!rs.phase_one()) return finish(Status::Infeasible);
  if (!rs.phase_two()) return finish(Status::Unbounded);
  auto xs = rs.primal(sf.cols);
  const int nv = lp.num_variables();
  sol.x.resize(static_cast<std::size_t>(nv));
  double value = 0;
  for (int j = 0; j < nv; ++j) {
    double v = sf.shift[j].get_d() + xs[sf.pos_col[j]];
    if (sf.neg_col[j] >= 0) v -= xs[sf.neg_col[j]];
    sol.x[j] = v;
    value += lp.costs()[j].get_d() * v;
  }
  auto y = rs.duals();
  sol.duals.assign(static_cast<std::size_t>(lp.num_constraints()), 0.0);
  for (int i = 0; i < sf.rows; ++i) {
    if (sf.original_row[i] >= 0) sol.duals[sf.original_row[i]] = sf.row_sign[i] * y[i];
  }
  sol.value = value;
  return finish(Status::Optimal);
}

}  // namespace coarse::lp
