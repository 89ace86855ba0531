// Copyright 2026 The ShuffleDP Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "shuffledp/lp.h"

#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "gmock/gmock.h"
#include "gtest/gtest.h"
#include "test_util.h"

namespace shuffledp {
namespace lp {
namespace {

using Matrix = std::vector<std::vector<double>>;

// Solves the square system M y = r by Gaussian elimination with partial
// pivoting; false if M is singular.
bool SolveSquare(Matrix m, std::vector<double> r, std::vector<double>& y) {
  const int n = static_cast<int>(r.size());
  for (int col = 0; col < n; ++col) {
    int piv = col;
    for (int i = col + 1; i < n; ++i) {
      if (std::abs(m[i][col]) > std::abs(m[piv][col])) piv = i;
    }
    if (std::abs(m[piv][col]) < 1e-10) return false;
    std::swap(m[piv], m[col]);
    std::swap(r[piv], r[col]);
    for (int i = 0; i < n; ++i) {
      if (i == col) continue;
      const double f = m[i][col] / m[col][col];
      for (int j = col; j < n; ++j) m[i][j] -= f * m[col][j];
      r[i] -= f * r[col];
    }
  }
  y.resize(n);
  for (int i = 0; i < n; ++i) y[i] = r[i] / m[i][i];
  return true;
}

// Minimum over basic feasible solutions, +inf if none. Assumes A has full
// row rank and the feasible set is bounded.
double VertexEnumerationOptimum(const Problem& p) {
  const int rows = static_cast<int>(p.b.size());
  const int cols = static_cast<int>(p.c.size());
  double best = std::numeric_limits<double>::infinity();
  std::vector<int> pick(rows);
  for (int i = 0; i < rows; ++i) pick[i] = i;
  while (true) {
    Matrix m(rows, std::vector<double>(rows));
    for (int i = 0; i < rows; ++i) {
      for (int j = 0; j < rows; ++j) m[i][j] = p.a[i][pick[j]];
    }
    std::vector<double> y;
    if (SolveSquare(m, p.b, y)) {
      bool feasible = true;
      double obj = 0.0;
      for (int j = 0; j < rows; ++j) {
        feasible &= y[j] >= -1e-9;
        obj += p.c[pick[j]] * y[j];
      }
      if (feasible) best = std::min(best, obj);
    }
    int i = rows - 1;
    while (i >= 0 && pick[i] == cols - rows + i) --i;
    if (i < 0) break;
    ++pick[i];
    for (int j = i + 1; j < rows; ++j) pick[j] = pick[j - 1] + 1;
  }
  return best;
}

void ExpectFeasible(const Problem& p, const Solution& s, double tol) {
  ASSERT_EQ(s.x.size(), p.c.size());
  double obj = 0.0;
  for (size_t j = 0; j < s.x.size(); ++j) {
    EXPECT_GE(s.x[j], -tol);
    obj += p.c[j] * s.x[j];
  }
  for (size_t i = 0; i < p.b.size(); ++i) {
    double lhs = 0.0;
    for (size_t j = 0; j < s.x.size(); ++j) lhs += p.a[i][j] * s.x[j];
    EXPECT_NEAR(lhs, p.b[i], tol);
  }
  EXPECT_NEAR(obj, s.objective, tol);
}

void ExpectFarkas(const Problem& p, const Solution& s) {
  ASSERT_EQ(s.certificate.size(), p.b.size());
  double yb = 0.0;
  for (size_t i = 0; i < p.b.size(); ++i) yb += s.certificate[i] * p.b[i];
  EXPECT_GT(yb, 1e-9);
  for (size_t j = 0; j < p.c.size(); ++j) {
    double ya = 0.0;
    for (size_t i = 0; i < p.b.size(); ++i) ya += s.certificate[i] * p.a[i][j];
    EXPECT_LE(ya, 1e-9) << j;
  }
}

TEST(SolveTest, SmallKnownOptimum) {
  // min -x1 - 2 x2  s.t.  x1 + x2 + s1 = 4, x1 + 3 x2 + s2 = 6.
  Problem p{{{1, 1, 1, 0}, {1, 3, 0, 1}}, {4, 6}, {-1, -2, 0, 0}};
  ASSERT_OK_AND_ASSIGN(Solution s, Solve(p));
  ASSERT_EQ(s.outcome, Outcome::kOptimal);
  EXPECT_NEAR(s.objective, -5, 1e-12);
  EXPECT_NEAR(s.x[0], 3, 1e-12);
  EXPECT_NEAR(s.x[1], 1, 1e-12);
  ExpectFeasible(p, s, 1e-12);
}

TEST(SolveTest, Infeasible) {
  // x1 + x2 = 1 and x1 + x2 = 2.
  Problem p{{{1, 1}, {1, 1}}, {1, 2}, {0, 0}};
  ASSERT_OK_AND_ASSIGN(Solution s, Solve(p));
  EXPECT_EQ(s.outcome, Outcome::kInfeasible);
  EXPECT_GT(s.infeasibility, 0.5);
  ExpectFarkas(p, s);
  // x1 - x2 = -1 with x >= 0 is feasible; -x1 = 1 is not.
  Problem q{{{-1, 0}}, {1}, {1, 1}};
  ASSERT_OK_AND_ASSIGN(Solution t, Solve(q));
  EXPECT_EQ(t.outcome, Outcome::kInfeasible);
  ExpectFarkas(q, t);
}

TEST(SolveTest, Unbounded) {
  // min -x1 s.t. x1 - x2 = 1.
  Problem p{{{1, -1}}, {1}, {-1, 0}};
  ASSERT_OK_AND_ASSIGN(Solution s, Solve(p));
  EXPECT_EQ(s.outcome, Outcome::kUnbounded);
}

TEST(SolveTest, RedundantRowsAreDropped) {
  Problem p{{{1, 1, 1}, {2, 2, 2}, {1, 0, -1}}, {3, 6, 0}, {1, 2, 3}};
  ASSERT_OK_AND_ASSIGN(Solution s, Solve(p));
  ASSERT_EQ(s.outcome, Outcome::kOptimal);
  EXPECT_EQ(s.rows.size(), 2u);
  EXPECT_EQ(s.basis.size(), s.rows.size());
  EXPECT_NEAR(s.objective, 6, 1e-12);
  ExpectFeasible(p, s, 1e-12);
}

TEST(SolveTest, NegativeRightHandSide) {
  // -x1 - x2 = -2, min x1 + 3 x2.
  Problem p{{{-1, -1}}, {-2}, {1, 3}};
  ASSERT_OK_AND_ASSIGN(Solution s, Solve(p));
  ASSERT_EQ(s.outcome, Outcome::kOptimal);
  EXPECT_NEAR(s.objective, 2, 1e-12);
}

// Beale's example cycles under the textbook largest-coefficient rule.
TEST(SolveTest, DegenerateBealeExampleTerminates) {
  Problem p{{{0.25, -8, -1, 9, 1, 0, 0},
             {0.5, -12, -0.5, 3, 0, 1, 0},
             {0, 0, 1, 0, 0, 0, 1}},
            {0, 0, 1},
            {-0.75, 20, -0.5, 6, 0, 0, 0}};
  ASSERT_OK_AND_ASSIGN(Solution s, Solve(p));
  ASSERT_EQ(s.outcome, Outcome::kOptimal);
  EXPECT_NEAR(s.objective, -1.25, 1e-12);
  ExpectFeasible(p, s, 1e-12);
}

TEST(SolveTest, RejectsMalformedProblems) {
  EXPECT_FALSE(Solve(Problem{{{1, 1}}, {1, 2}, {0, 0}}).ok());
  EXPECT_FALSE(Solve(Problem{{{1, 1}}, {1}, {0}}).ok());
}

TEST(SolveTest, MatchesVertexEnumerationOnRandomProblems) {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(-1, 1);
  int feasible = 0, infeasible = 0;
  for (int trial = 0; trial < 300; ++trial) {
    const int rows = 2 + trial % 3, cols = rows + 2 + trial % 4;
    Problem p;
    p.a.assign(rows, std::vector<double>(cols));
    p.b.assign(rows, 0.0);
    p.c.assign(cols, 0.0);
    // First row bounds the feasible set: sum of x equals 5.
    for (int j = 0; j < cols; ++j) p.a[0][j] = 1.0;
    p.b[0] = 5.0;
    for (int i = 1; i < rows; ++i) {
      for (int j = 0; j < cols; ++j) p.a[i][j] = u(rng);
      p.b[i] = 2 * u(rng);
    }
    for (int j = 0; j < cols; ++j) p.c[j] = u(rng);
    ASSERT_OK_AND_ASSIGN(Solution s, Solve(p));
    const double oracle = VertexEnumerationOptimum(p);
    if (std::isinf(oracle)) {
      EXPECT_EQ(s.outcome, Outcome::kInfeasible) << trial;
      if (s.outcome == Outcome::kInfeasible) ExpectFarkas(p, s);
      ++infeasible;
    } else {
      ASSERT_EQ(s.outcome, Outcome::kOptimal) << trial;
      EXPECT_NEAR(s.objective, oracle, 1e-8) << trial;
      ExpectFeasible(p, s, 1e-8);
      ++feasible;
    }
  }
  EXPECT_GT(feasible, 50);
  EXPECT_GT(infeasible, 10);
}

}  // namespace
}  // namespace lp
}  // namespace shuffledp
