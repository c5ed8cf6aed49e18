#include <gtest/gtest.h>

#include <random>

#include "coarse/lp.hpp"

using namespace coarse;
using namespace coarse::lp;

namespace {

const NumericMode kModes[] = {NumericMode::Exact, NumericMode::Float};

}  // namespace

TEST(Lp, LowerBoundOnly) {
  for (auto mode : kModes) {
    LPInstance lp;
    int x = lp.add_variable(1);
    lp.add_constraint({{x, 1}}, Sense::GreaterEqual, 1);
    auto s = solve_lp(lp, mode);
    ASSERT_EQ(s.status, Status::Optimal);
    EXPECT_NEAR(s.value, 1.0, 1e-9);
    if (mode == NumericMode::Exact) {
      EXPECT_EQ(*s.exact_value, 1);
      EXPECT_EQ(s.exact_duals[0], 1);
    }
  }
}

TEST(Lp, Infeasible) {
  for (auto mode : kModes) {
    LPInstance lp;
    int x = lp.add_variable(1);
    lp.add_constraint({{x, 1}}, Sense::LessEqual, -1);
    EXPECT_EQ(solve_lp(lp, mode).status, Status::Infeasible);
  }
}

TEST(Lp, Unbounded) {
  for (auto mode : kModes) {
    LPInstance lp;
    int x = lp.add_variable(-1);
    int y = lp.add_variable(0);
    lp.add_constraint({{x, 1}, {y, -1}}, Sense::LessEqual, 2);
    EXPECT_EQ(solve_lp(lp, mode).status, Status::Unbounded);
  }
}

TEST(Lp, AbsoluteValueEncoding) {
  for (auto mode : kModes) {
    LPInstance lp;
    int t = lp.add_free_variable(1);
    lp.add_constraint({{t, -1}}, Sense::LessEqual, Rational(3, 7));
    lp.add_constraint({{t, 1}}, Sense::GreaterEqual, Rational(3, 7));
    auto s = solve_lp(lp, mode);
    ASSERT_EQ(s.status, Status::Optimal);
    if (mode == NumericMode::Exact) {
      EXPECT_EQ(*s.exact_value, Rational(3, 7));
    } else {
      EXPECT_NEAR(s.value, 3.0 / 7.0, 1e-9);
    }
  }
}

TEST(Lp, EqualityAndUpperBounds) {
  // min -x - 2y, x + y = 3, y <= 2, x in [0, 5] -> x=1, y=2, value -5
  for (auto mode : kModes) {
    LPInstance lp;
    int x = lp.add_variable(-1, 0, Rational(5));
    int y = lp.add_variable(-2, 0, Rational(2));
    lp.add_constraint({{x, 1}, {y, 1}}, Sense::Equal, 3);
    auto s = solve_lp(lp, mode);
    ASSERT_EQ(s.status, Status::Optimal);
    EXPECT_NEAR(s.value, -5, 1e-9);
    EXPECT_NEAR(s.x[x], 1, 1e-9);
    EXPECT_NEAR(s.x[y], 2, 1e-9);
  }
}

TEST(Lp, RedundantEqualities) {
  for (auto mode : kModes) {
    LPInstance lp;
    int x = lp.add_variable(1);
    int y = lp.add_variable(1);
    lp.add_constraint({{x, 1}, {y, 1}}, Sense::Equal, 2);
    lp.add_constraint({{x, 2}, {y, 2}}, Sense::Equal, 4);
    lp.add_constraint({{x, 1}, {y, -1}}, Sense::Equal, 0);
    auto s = solve_lp(lp, mode);
    ASSERT_EQ(s.status, Status::Optimal);
    EXPECT_NEAR(s.value, 2, 1e-9);
    EXPECT_NEAR(s.x[x], 1, 1e-9);
  }
}

TEST(Lp, NegativeLowerBoundShift) {
  for (auto mode : kModes) {
    LPInstance lp;
    int x = lp.add_variable(1, Rational(-4));
    int y = lp.add_variable(1, Rational(-1));
    lp.add_constraint({{x, 1}, {y, 1}}, Sense::GreaterEqual, -3);
    auto s = solve_lp(lp, mode);
    ASSERT_EQ(s.status, Status::Optimal);
    EXPECT_NEAR(s.value, -3, 1e-9);
  }
}

// Weak/strong duality on random feasible bounded instances: the exact
// optimum equals b^T y and the float optimum agrees to 1e-6.
TEST(Lp, RandomInstancesDualityAndAgreement) {
  std::mt19937 rng(17);
  for (int trial = 0; trial < 60; ++trial) {
    const int n = 2 + static_cast<int>(rng() % 6);
    const int m = 1 + static_cast<int>(rng() % 6);
    LPInstance lp;
    for (int j = 0; j < n; ++j) lp.add_variable(Rational(static_cast<int>(rng() % 9) - 3), 0, Rational(10));
    for (int i = 0; i < m; ++i) {
      std::vector<Term> terms;
      for (int j = 0; j < n; ++j) terms.emplace_back(j, Rational(static_cast<int>(rng() % 7) - 3));
      auto sense = static_cast<Sense>(rng() % 3);
      // x = 1 is always feasible: pick rhs around the row sum
      Rational sum = 0;
      for (auto& [j, a] : terms) sum += a;
      Rational slack(static_cast<int>(rng() % 3));
      Rational rhs = sum;
      if (sense == Sense::LessEqual) rhs += slack;
      if (sense == Sense::GreaterEqual) rhs -= slack;
      lp.add_constraint(terms, sense, rhs);
    }
    auto e = solve_lp(lp, NumericMode::Exact);
    auto f = solve_lp(lp, NumericMode::Float);
    ASSERT_EQ(e.status, Status::Optimal);
    ASSERT_EQ(f.status, Status::Optimal);
    EXPECT_NEAR(e.value, f.value, 1e-6);

    // Feasibility of the exact primal.
    for (const auto& row : lp.constraints()) {
      Rational lhs = 0;
      for (const auto& [j, a] : row.terms) lhs += a * e.exact_x[j];
      if (row.sense == Sense::LessEqual) {
        EXPECT_LE(lhs, row.rhs);
      } else if (row.sense == Sense::GreaterEqual) {
        EXPECT_GE(lhs, row.rhs);
      } else {
        EXPECT_EQ(lhs, row.rhs);
      }
    }
    // Complementary slackness: reduced costs c - A^T y are nonnegative on
    // variables at their lower bound and nonpositive at their upper bound.
    for (int j = 0; j < n; ++j) {
      Rational d = lp.costs()[j];
      for (int i = 0; i < m; ++i)
        for (const auto& [k, a] : lp.constraints()[i].terms)
          if (k == j) d -= a * e.exact_duals[i];
      if (e.exact_x[j] == 0) {
        EXPECT_GE(d, 0);
      } else if (e.exact_x[j] == 10) {
        EXPECT_LE(d, 0);
      } else {
        EXPECT_EQ(d, 0);
      }
    }
  }
}

TEST(Lp, FloatDegenerateManyRows) {
  // min t s.t. |x_i - x_{i+1}| <= t around a ring with x_0 = 0, x_k = 1.
  const int n = 40;
  LPInstance lp;
  int t = lp.add_variable(1);
  std::vector<int> x;
  for (int i = 0; i < n; ++i) x.push_back(lp.add_variable(0));
  lp.add_constraint({{x[0], 1}}, Sense::Equal, 0);
  lp.add_constraint({{x[n / 2], 1}}, Sense::Equal, 1);
  for (int i = 0; i < n; ++i) {
    int a = x[i], b = x[(i + 1) % n];
    lp.add_constraint({{a, 1}, {b, -1}, {t, -1}}, Sense::LessEqual, 0);
    lp.add_constraint({{b, 1}, {a, -1}, {t, -1}}, Sense::LessEqual, 0);
  }
  auto e = solve_lp(lp, NumericMode::Exact);
  auto f = solve_lp(lp, NumericMode::Float);
  EXPECT_EQ(*e.exact_value, Rational(1, n / 2));
  EXPECT_NEAR(f.value, 1.0 / (n / 2), 1e-9);
}

TEST(Lp, ModeParsing) {
  EXPECT_EQ(parse_mode("exact"), NumericMode::Exact);
  EXPECT_EQ(parse_mode("float"), NumericMode::Float);
  EXPECT_THROW(parse_mode("fast"), FormatError);
}
