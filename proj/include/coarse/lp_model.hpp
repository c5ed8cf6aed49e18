#pragma once

#include <algorithm>
#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "coarse/error.hpp"
#include "coarse/rational.hpp"

namespace coarse::lp {

enum class Sense { LessEqual, Equal, GreaterEqual };
enum class Status { Optimal, Infeasible, Unbounded };
enum class NumericMode { Exact, Float };

inline const char* to_string(Status s) {
  switch (s) {
    case Status::Optimal: return "optimal";
    case Status::Infeasible: return "infeasible";
    case Status::Unbounded: return "unbounded";
  }
  return "?";
}

inline const char* to_string(NumericMode m) { return m == NumericMode::Exact ? "exact" : "float"; }

inline NumericMode parse_mode(const std::string& s) {
  if (s == "exact") return NumericMode::Exact;
  if (s == "float") return NumericMode::Float;
  throw FormatError("numeric mode must be 'exact' or 'float', got '" + s + "'");
}

struct Variable {
  Rational lower = 0;
  std::optional<Rational> upper;
  bool free = false;  // no lower bound
  std::string name;
};

using Term = std::pair<int, Rational>;

struct Constraint {
  std::vector<Term> terms;
  Sense sense = Sense::LessEqual;
  Rational rhs = 0;
};

// min c^T x subject to linear rows and variable bounds. Coefficients are
// exact; float mode rounds them to double once, at solve time.
class LPInstance {
 public:
  int add_variable(Rational cost = 0, Rational lower = 0, std::optional<Rational> upper = std::nullopt,
                   std::string name = {}) {
    vars_.push_back({std::move(lower), std::move(upper), false, std::move(name)});
    cost_.push_back(std::move(cost));
    return static_cast<int>(vars_.size()) - 1;
  }
  int add_free_variable(Rational cost = 0, std::string name = {}) {
    vars_.push_back({0, std::nullopt, true, std::move(name)});
    cost_.push_back(std::move(cost));
    return static_cast<int>(vars_.size()) - 1;
  }
  void set_cost(int var, Rational c) { cost_.at(static_cast<std::size_t>(var)) = std::move(c); }

  void add_constraint(std::vector<Term> terms, Sense sense, Rational rhs) {
    for (const auto& [j, a] : terms) {
      if (j < 0 || j >= num_variables()) throw Rejection("constraint references unknown variable " + std::to_string(j));
    }
    rows_.push_back({std::move(terms), sense, std::move(rhs)});
  }

  int num_variables() const { return static_cast<int>(vars_.size()); }
  int num_constraints() const { return static_cast<int>(rows_.size()); }
  const std::vector<Variable>& variables() const { return vars_; }
  const std::vector<Rational>& costs() const { return cost_; }
  const std::vector<Constraint>& constraints() const { return rows_; }
  std::size_t nonzeros() const {
    std::size_t nnz = 0;
    for (const auto& r : rows_) nnz += r.terms.size();
    return nnz;
  }

 private:
  std::vector<Variable> vars_;
  std::vector<Rational> cost_;
  std::vector<Constraint> rows_;
};

struct Solution {
  Status status = Status::Infeasible;
  NumericMode mode = NumericMode::Exact;
  double value = 0;                       // objective (both modes)
  std::optional<Rational> exact_value;    // exact mode
  std::vector<double> x;                  // per original variable
  std::vector<Rational> exact_x;          // exact mode
  // Multipliers of the original constraints, y <= 0 on <= rows and y >= 0
  // on >= rows, with c - A^T y >= 0 on nonbasic columns at optimality.
  std::vector<double> duals;
  std::vector<Rational> exact_duals;
  long pivots = 0;
  double runtime_ms = 0;
};

struct SolveOptions {
  double tolerance = 1e-9;
  long max_pivots = 50'000'000;
  // Float mode: Dantzig pricing with a switch to Bland's rule after this
  // many consecutive degenerate pivots. Zero means Bland throughout.
  int bland_after_degenerate = 1000;
};

// ---------------------------------------------------------------------------
// Standard form: min c^T x + offset, A x = b, x >= 0, b >= 0. Every row
// carries one identity column (a slack with coefficient +1, or an
// artificial appended by the solver).

struct StandardForm {
  int rows = 0;
  int cols = 0;  // structural + slack columns
  std::vector<std::vector<std::pair<int, Rational>>> row_terms;  // sparse rows of A
  std::vector<Rational> b;
  std::vector<Rational> c;
  Rational offset = 0;
  std::vector<int> row_sign;       // original row was multiplied by this
  std::vector<int> identity_col;   // slack with +1 in this row, or -1
  std::vector<int> original_row;   // -1 for upper-bound rows
  // Original variable j = lower_j + x[pos_j] - x[neg_j] (neg_j may be -1).
  std::vector<int> pos_col, neg_col;
  std::vector<Rational> shift;
};

inline StandardForm standardize(const LPInstance& lp) {
  StandardForm sf;
  const auto& vars = lp.variables();
  const int nv = lp.num_variables();
  sf.pos_col.resize(static_cast<std::size_t>(nv));
  sf.neg_col.assign(static_cast<std::size_t>(nv), -1);
  sf.shift.resize(static_cast<std::size_t>(nv));
  int col = 0;
  for (int j = 0; j < nv; ++j) {
    const auto& v = vars[static_cast<std::size_t>(j)];
    sf.pos_col[static_cast<std::size_t>(j)] = col++;
    if (v.free) {
      sf.neg_col[static_cast<std::size_t>(j)] = col++;
      sf.shift[static_cast<std::size_t>(j)] = 0;
    } else {
      sf.shift[static_cast<std::size_t>(j)] = v.lower;
    }
  }
  sf.c.assign(static_cast<std::size_t>(col), 0);
  for (int j = 0; j < nv; ++j) {
    const Rational& cj = lp.costs()[static_cast<std::size_t>(j)];
    sf.c[static_cast<std::size_t>(sf.pos_col[static_cast<std::size_t>(j)])] = cj;
    if (sf.neg_col[static_cast<std::size_t>(j)] >= 0) sf.c[static_cast<std::size_t>(sf.neg_col[static_cast<std::size_t>(j)])] = -cj;
    sf.offset += cj * sf.shift[static_cast<std::size_t>(j)];
  }

  struct PendingRow {
    std::vector<std::pair<int, Rational>> terms;
    Sense sense;
    Rational rhs;
    int original;
  };
  std::vector<PendingRow> pending;
  for (int i = 0; i < lp.num_constraints(); ++i) {
    const auto& r = lp.constraints()[static_cast<std::size_t>(i)];
    PendingRow p{{}, r.sense, r.rhs, i};
    for (const auto& [j, a] : r.terms) {
      if (a == 0) continue;
      p.rhs -= a * sf.shift[static_cast<std::size_t>(j)];
      p.terms.emplace_back(sf.pos_col[static_cast<std::size_t>(j)], a);
      if (sf.neg_col[static_cast<std::size_t>(j)] >= 0) p.terms.emplace_back(sf.neg_col[static_cast<std::size_t>(j)], -a);
    }
    pending.push_back(std::move(p));
  }
  for (int j = 0; j < nv; ++j) {
    const auto& v = vars[static_cast<std::size_t>(j)];
    if (!v.upper) continue;
    if (v.free) throw Rejection("free variable with an upper bound is not supported; use a lower bound instead");
    if (*v.upper < v.lower) throw Rejection("variable " + std::to_string(j) + " has upper bound below lower bound");
    pending.push_back({{{sf.pos_col[static_cast<std::size_t>(j)], Rational(1)}}, Sense::LessEqual, *v.upper - v.lower, -1});
  }

  for (auto& p : pending) {
    int sign = p.rhs < 0 ? -1 : 1;
    std::vector<std::pair<int, Rational>> terms;
    // Merge duplicate columns.
    std::sort(p.terms.begin(), p.terms.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    for (auto& [j, a] : p.terms) {
      if (!terms.empty() && terms.back().first == j) {
        terms.back().second += a;
      } else {
        terms.emplace_back(j, a);
      }
    }
    std::erase_if(terms, [](const auto& t) { return t.second == 0; });
    int identity = -1;
    if (p.sense != Sense::Equal) {
      int slack = col++;
      sf.c.emplace_back(0);
      Rational coef = p.sense == Sense::LessEqual ? 1 : -1;
      terms.emplace_back(slack, coef);
      if (coef * sign > 0) identity = slack;
    }
    if (sign < 0) {
      for (auto& t : terms) t.second = -t.second;
      p.rhs = -p.rhs;
    }
    sf.row_terms.push_back(std::move(terms));
    sf.b.push_back(p.rhs);
    sf.row_sign.push_back(sign);
    sf.identity_col.push_back(identity);
    sf.original_row.push_back(p.original);
  }
  sf.rows = static_cast<int>(sf.row_terms.size());
  sf.cols = col;
  return sf;
}

}  // namespace coarse::lp
