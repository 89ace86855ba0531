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

#include <algorithm>
#include <cmath>
#include <limits>

#include "absl/status/status.h"

namespace shuffledp {
namespace lp {
namespace {

// Tableau over columns [0, n) original and [n, n + m) artificial, with the
// right-hand side stored in column n + m. Rows may be removed later; the
// column layout stays fixed.
class Tableau {
 public:
  Tableau(int m, int n) : m_(m), n_(n), cols_(n + m), width_(n + m + 1) {
    t_.assign(static_cast<size_t>(m) * width_, 0.0);
    obj_.assign(width_, 0.0);
    basis_.assign(m, -1);
  }

  double& at(int i, int j) { return t_[static_cast<size_t>(i) * width_ + j]; }
  double at(int i, int j) const {
    return t_[static_cast<size_t>(i) * width_ + j];
  }
  double& rhs(int i) { return at(i, cols_); }

  void Pivot(int row, int col) {
    double* pr = &t_[static_cast<size_t>(row) * width_];
    const double inv = 1.0 / pr[col];
    for (int j = 0; j < width_; ++j) pr[j] *= inv;
    pr[col] = 1.0;
    for (int i = 0; i < m_; ++i) {
      if (i == row) continue;
      double* pi = &t_[static_cast<size_t>(i) * width_];
      const double f = pi[col];
      if (f == 0.0) continue;
      for (int j = 0; j < width_; ++j) pi[j] -= f * pr[j];
      pi[col] = 0.0;
    }
    const double f = obj_[col];
    if (f != 0.0) {
      for (int j = 0; j < width_; ++j) obj_[j] -= f * pr[j];
      obj_[col] = 0.0;
    }
    basis_[row] = col;
  }

  // Rebuilds the reduced-cost row for column costs `cost` (size n + m).
  void SetObjective(const std::vector<double>& cost) {
    for (int j = 0; j < width_; ++j) obj_[j] = j < cols_ ? cost[j] : 0.0;
    for (int i = 0; i < m_; ++i) {
      const double cb = cost[basis_[i]];
      if (cb == 0.0) continue;
      for (int j = 0; j < width_; ++j) obj_[j] -= cb * at(i, j);
    }
  }

  // Runs simplex iterations on columns allowed by `allowed`. Returns false
  // if unbounded.
  absl::StatusOr<bool> Optimize(const std::vector<char>& allowed,
                                const Options& options) {
    int degenerate_run = 0;
    for (int iter = 0; iter < options.max_iterations; ++iter) {
      const bool bland = degenerate_run > 50;
      int enter = -1;
      double best = -options.pivot_tolerance;
      for (int j = 0; j < cols_; ++j) {
        if (!allowed[j]) continue;
        if (obj_[j] < best) {
          enter = j;
          if (bland) break;
          best = obj_[j];
        }
      }
      if (enter < 0) return true;
      int leave = -1;
      double ratio = std::numeric_limits<double>::infinity();
      for (int i = 0; i < m_; ++i) {
        const double a = at(i, enter);
        if (a <= options.pivot_tolerance) continue;
        const double r = std::max(0.0, rhs(i)) / a;
        if (r < ratio ||
            (r == ratio && leave >= 0 && basis_[i] < basis_[leave])) {
          ratio = r;
          leave = i;
        }
      }
      if (leave < 0) return false;
      degenerate_run = ratio == 0.0 ? degenerate_run + 1 : 0;
      Pivot(leave, enter);
    }
    return absl::ResourceExhaustedError("simplex iteration limit reached");
  }

  void RemoveRow(int row) {
    t_.erase(t_.begin() + static_cast<ptrdiff_t>(row) * width_,
             t_.begin() + static_cast<ptrdiff_t>(row + 1) * width_);
    basis_.erase(basis_.begin() + row);
    --m_;
  }

  int m() const { return m_; }
  int n() const { return n_; }
  const std::vector<int>& basis() const { return basis_; }
  std::vector<int>& mutable_basis() { return basis_; }
  const std::vector<double>& objective_row() const { return obj_; }

 private:
  int m_;
  int n_;
  int cols_;
  int width_;
  std::vector<double> t_;
  std::vector<double> obj_;
  std::vector<int> basis_;
};

}  // namespace

absl::StatusOr<Solution> Solve(const Problem& problem,
                               const Options& options) {
  const int m = static_cast<int>(problem.a.size());
  const int n = static_cast<int>(problem.c.size());
  if (static_cast<int>(problem.b.size()) != m) {
    return absl::InvalidArgumentError("b size does not match row count");
  }
  for (const auto& row : problem.a) {
    if (static_cast<int>(row.size()) != n) {
      return absl::InvalidArgumentError("row size does not match c");
    }
  }
  // Original row index for each tableau row, and the sign applied to it.
  std::vector<int> origin(m);
  std::vector<double> sign(m, 1.0);
  Tableau tab(m, n);
  for (int i = 0; i < m; ++i) {
    origin[i] = i;
    sign[i] = problem.b[i] < 0 ? -1.0 : 1.0;
    for (int j = 0; j < n; ++j) tab.at(i, j) = sign[i] * problem.a[i][j];
    tab.at(i, n + i) = 1.0;
    tab.rhs(i) = sign[i] * problem.b[i];
    tab.mutable_basis()[i] = n + i;
  }

  // Phase one: minimize the artificial mass.
  std::vector<double> cost1(n + m, 0.0);
  for (int i = 0; i < m; ++i) cost1[n + i] = 1.0;
  tab.SetObjective(cost1);
  std::vector<char> allowed(n + m, 1);
  auto phase1 = tab.Optimize(allowed, options);
  if (!phase1.ok()) return phase1.status();

  Solution sol;
  double infeasibility = 0.0;
  for (int i = 0; i < tab.m(); ++i) {
    if (tab.basis()[i] >= n) infeasibility += std::max(0.0, tab.rhs(i));
  }
  double scale = 1.0;
  for (double v : problem.b) scale = std::max(scale, std::abs(v));
  if (infeasibility > options.feasibility_tolerance * scale) {
    sol.outcome = Outcome::kInfeasible;
    sol.infeasibility = infeasibility;
    // Phase-one duals: reduced cost of artificial i is 1 - y_i (row signs
    // folded back in).
    sol.certificate.assign(m, 0.0);
    for (int i = 0; i < m; ++i) {
      sol.certificate[i] = sign[i] * (1.0 - tab.objective_row()[n + i]);
    }
    return sol;
  }

  // Drive remaining artificials out of the basis, dropping redundant rows.
  for (int i = 0; i < tab.m();) {
    if (tab.basis()[i] < n) {
      ++i;
      continue;
    }
    int col = -1;
    double best = options.pivot_tolerance;
    for (int j = 0; j < n; ++j) {
      if (std::abs(tab.at(i, j)) > best) {
        best = std::abs(tab.at(i, j));
        col = j;
      }
    }
    if (col >= 0) {
      tab.Pivot(i, col);
      ++i;
    } else {
      tab.RemoveRow(i);
      origin.erase(origin.begin() + i);
    }
  }

  std::vector<double> cost2(n + m, 0.0);
  for (int j = 0; j < n; ++j) cost2[j] = problem.c[j];
  tab.SetObjective(cost2);
  for (int i = 0; i < m; ++i) allowed[n + i] = 0;
  auto phase2 = tab.Optimize(allowed, options);
  if (!phase2.ok()) return phase2.status();
  if (!*phase2) {
    sol.outcome = Outcome::kUnbounded;
    return sol;
  }
  sol.outcome = Outcome::kOptimal;
  sol.x.assign(n, 0.0);
  for (int i = 0; i < tab.m(); ++i) {
    sol.x[tab.basis()[i]] = std::max(0.0, tab.rhs(i));
  }
  double obj = 0.0;
  for (int j = 0; j < n; ++j) obj += problem.c[j] * sol.x[j];
  sol.objective = obj;
  sol.basis = tab.basis();
  sol.rows = origin;
  return sol;
}

}  // namespace lp
}  // namespace shuffledp
