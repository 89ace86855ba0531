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

#include <algorithm>
#include <cmath>
#include <exception>

#include "absl/strings/str_cat.h"
#include "boost/multiprecision/cpp_bin_float.hpp"
#include "json.hpp"
#include "shuffledp/hardness.h"
#include "shuffledp/lp.h"
#include "shuffledp/status_macros.h"

namespace shuffledp {
namespace hardness {
namespace {

using Wide = boost::multiprecision::cpp_bin_float_50;

std::vector<double> MakeGrid(double Lambda, double step) {
  std::vector<double> grid = {0.0};
  const int64_t count = static_cast<int64_t>(std::floor((Lambda - 1) / step));
  for (int64_t i = 0; i <= count; ++i) grid.push_back(1.0 + i * step);
  if (grid.back() < Lambda) grid.push_back(Lambda);
  return grid;
}

// Constraint matrix entries. Rows: sum u = 1, sum v = 1, E[U] = 1, and
// E[T_j(Y_U)] = E[T_j(Y_V)] for j in [1, L] with Y = 2X / Lambda - 1.
template <typename Real>
void BuildRows(const std::vector<double>& grid, int L, double Lambda,
               std::vector<std::vector<Real>>& a, std::vector<Real>& b) {
  const size_t g = grid.size();
  const int rows = L + 3;
  a.assign(rows, std::vector<Real>(2 * g, Real(0)));
  b.assign(rows, Real(0));
  const Real lam(Lambda);
  for (size_t i = 0; i < g; ++i) {
    const Real x(grid[i]);
    a[0][i] = 1;
    a[1][g + i] = 1;
    a[2][i] = x / lam;
    const Real y = 2 * x / lam - 1;
    Real prev = 1, cur = y;
    for (int j = 1; j <= L; ++j) {
      a[2 + j][i] = cur;
      a[2 + j][g + i] = -cur;
      const Real next = 2 * y * cur - prev;
      prev = cur;
      cur = next;
    }
  }
  b[0] = 1;
  b[1] = 1;
  b[2] = Real(1) / lam;
}

// Solves the square system in place by Gaussian elimination with partial
// pivoting. Returns false if singular.
bool SolveWide(std::vector<std::vector<Wide>> a, std::vector<Wide> b,
               std::vector<Wide>& x) {
  const size_t n = b.size();
  for (size_t col = 0; col < n; ++col) {
    size_t piv = col;
    for (size_t r = col + 1; r < n; ++r) {
      if (abs(a[r][col]) > abs(a[piv][col])) piv = r;
    }
    if (a[piv][col] == 0) return false;
    std::swap(a[piv], a[col]);
    std::swap(b[piv], b[col]);
    for (size_t r = col + 1; r < n; ++r) {
      const Wide f = a[r][col] / a[col][col];
      if (f == 0) continue;
      for (size_t c = col; c < n; ++c) a[r][c] -= f * a[col][c];
      b[r] -= f * b[col];
    }
  }
  x.assign(n, Wide(0));
  for (size_t i = n; i-- > 0;) {
    Wide s = b[i];
    for (size_t c = i + 1; c < n; ++c) s -= a[i][c] * x[c];
    x[i] = s / a[i][i];
  }
  return true;
}

}  // namespace

absl::StatusOr<MomentPair> MatchMoments(int L, double Lambda,
                                        double grid_step) {
  if (L < 1) return absl::InvalidArgumentError("L must be >= 1");
  if (!(Lambda >= 1.0)) return absl::InvalidArgumentError("Lambda must be >= 1");
  if (!(grid_step > 0.0) || grid_step > 0.5) {
    return absl::InvalidArgumentError("grid_step must lie in (0, 0.5]");
  }
  const std::vector<double> grid = MakeGrid(Lambda, grid_step);
  const size_t g = grid.size();
  lp::Problem problem;
  BuildRows<double>(grid, L, Lambda, problem.a, problem.b);
  problem.c.assign(2 * g, 0.0);
  problem.c[0] = -1.0;
  problem.c[g] = 1.0;
  ASSIGN_OR_RETURN(lp::Solution sol, lp::Solve(problem));
  if (sol.outcome == lp::Outcome::kInfeasible) {
    std::string cert;
    for (double y : sol.certificate) absl::StrAppend(&cert, y, " ");
    return absl::FailedPreconditionError(
        absl::StrCat("moment LP infeasible (residual ", sol.infeasibility,
                     "); Farkas certificate: ", cert));
  }
  if (sol.outcome != lp::Outcome::kOptimal) {
    return absl::InternalError("moment LP unbounded");
  }

  // Re-solve the optimal basis in 50-digit arithmetic.
  std::vector<double> x = sol.x;
  {
    std::vector<std::vector<Wide>> a_full;
    std::vector<Wide> b_full;
    BuildRows<Wide>(grid, L, Lambda, a_full, b_full);
    const size_t m = sol.rows.size();
    std::vector<std::vector<Wide>> a(m, std::vector<Wide>(m));
    std::vector<Wide> b(m), xb;
    for (size_t i = 0; i < m; ++i) {
      b[i] = b_full[sol.rows[i]];
      for (size_t j = 0; j < m; ++j) a[i][j] = a_full[sol.rows[i]][sol.basis[j]];
    }
    if (SolveWide(a, b, xb)) {
      bool feasible = true;
      for (const Wide& v : xb) feasible = feasible && v > Wide(-1e-30);
      if (feasible) {
        std::fill(x.begin(), x.end(), 0.0);
        for (size_t j = 0; j < m; ++j) {
          x[sol.basis[j]] = std::max(0.0, static_cast<double>(xb[j]));
        }
      }
    }
  }

  MomentPair pair;
  pair.L = L;
  pair.Lambda = Lambda;
  for (size_t i = 0; i < g; ++i) {
    if (i == 0 || x[i] > 0.0 || x[g + i] > 0.0) {
      pair.support.push_back(grid[i]);
      pair.u_masses.push_back(x[i]);
      pair.v_masses.push_back(x[g + i]);
    }
  }
  pair.gap = pair.u_masses[0] - pair.v_masses[0];
  return pair;
}

MomentReport VerifyMoments(const MomentPair& pair) {
  MomentReport report;
  Wide mu = 0, mv = 0;
  for (size_t i = 0; i < pair.support.size(); ++i) {
    mu += Wide(pair.u_masses[i]);
    mv += Wide(pair.v_masses[i]);
  }
  report.mass_u = static_cast<double>(mu);
  report.mass_v = static_cast<double>(mv);
  for (int j = 1; j <= pair.L; ++j) {
    Wide eu = 0, ev = 0;
    for (size_t i = 0; i < pair.support.size(); ++i) {
      const Wide xj = pow(Wide(pair.support[i]), j);
      eu += Wide(pair.u_masses[i]) * xj;
      ev += Wide(pair.v_masses[i]) * xj;
    }
    if (j == 1) {
      report.mean_u = static_cast<double>(eu);
      report.mean_v = static_cast<double>(ev);
    }
    const Wide scale = eu > 1 ? eu : Wide(1);
    report.max_relative_mismatch = std::max(
        report.max_relative_mismatch, static_cast<double>(abs(eu - ev) / scale));
  }
  report.gap = pair.u_masses.empty() ? 0.0
                                     : pair.u_masses[0] - pair.v_masses[0];
  return report;
}

absl::StatusOr<LambdaSweep> MinimalLambdaConstant(int L, double grid_step,
                                                  double target_gap,
                                                  double c_max,
                                                  double resolution) {
  const double l2 = static_cast<double>(L) * L;
  auto solve = [&](double c) { return MatchMoments(L, c * l2, grid_step); };
  double lo = std::max(1.0 / l2, resolution), hi = lo;
  LambdaSweep best;
  for (;;) {
    ASSIGN_OR_RETURN(MomentPair pair, solve(hi));
    if (pair.gap > target_gap) {
      best.c = hi;
      best.pair = std::move(pair);
      break;
    }
    lo = hi;
    if (hi >= c_max) {
      return absl::NotFoundError(absl::StrCat(
          "gap ", pair.gap, " <= ", target_gap, " at c = ", c_max));
    }
    hi = std::min(c_max, hi * 2);
  }
  while (hi - lo > resolution) {
    const double mid = std::round((lo + hi) / 2 / resolution) * resolution;
    if (mid <= lo || mid >= hi) break;
    ASSIGN_OR_RETURN(MomentPair pair, solve(mid));
    if (pair.gap > target_gap) {
      hi = mid;
      best.c = mid;
      best.pair = std::move(pair);
    } else {
      lo = mid;
    }
  }
  return best;
}

std::string MomentPairToJson(const MomentPair& pair) {
  nlohmann::ordered_json j;
  j["support"] = pair.support;
  j["u_masses"] = pair.u_masses;
  j["v_masses"] = pair.v_masses;
  j["L"] = pair.L;
  j["Lambda"] = pair.Lambda;
  j["gap"] = pair.gap;
  return j.dump(2);
}

absl::StatusOr<MomentPair> MomentPairFromJson(std::string_view json) {
  try {
    const nlohmann::json j = nlohmann::json::parse(json);
    MomentPair pair;
    pair.support = j.at("support").get<std::vector<double>>();
    pair.u_masses = j.at("u_masses").get<std::vector<double>>();
    pair.v_masses = j.at("v_masses").get<std::vector<double>>();
    pair.L = j.at("L").get<int>();
    pair.Lambda = j.at("Lambda").get<double>();
    pair.gap = j.at("gap").get<double>();
    if (pair.u_masses.size() != pair.support.size() ||
        pair.v_masses.size() != pair.support.size()) {
      return absl::InvalidArgumentError("mass vectors differ from support");
    }
    return pair;
  } catch (const std::exception& e) {
    return absl::InvalidArgumentError(absl::StrCat("bad MomentPair: ", e.what()));
  }
}

}  // namespace hardness
}  // namespace shuffledp
