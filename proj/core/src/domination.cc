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
#include <limits>
#include <map>

#include "absl/strings/str_cat.h"
#include "shuffledp/auditor.h"
#include "shuffledp/lp.h"
#include "shuffledp/numeric.h"
#include "shuffledp/status_macros.h"

namespace shuffledp {
namespace audit {
namespace {

using SubTupleLaw = std::map<std::vector<int>, double>;

// Law of the ordered k-tuple produced by pre-shuffling each output multiset.
std::vector<SubTupleLaw> OrderedLaws(const MultiMessageRandomizer& r) {
  std::vector<SubTupleLaw> laws(r.matrix.num_inputs());
  for (int x = 0; x < r.matrix.num_inputs(); ++x) {
    for (int t = 0; t < r.outputs.size(); ++t) {
      const double mass = r.matrix(x, t);
      if (mass == 0.0) continue;
      std::vector<int> tuple = r.outputs.tuple(t);
      std::sort(tuple.begin(), tuple.end());
      std::vector<std::vector<int>> orders;
      do {
        orders.push_back(tuple);
      } while (std::next_permutation(tuple.begin(), tuple.end()));
      for (const std::vector<int>& order : orders) {
        laws[x][order] += mass / static_cast<double>(orders.size());
      }
    }
  }
  return laws;
}

// Position sets of the users touched by a selection, in canonical order.
std::vector<std::vector<int>> Groups(
    const std::vector<std::pair<int, int>>& selection) {
  std::map<int, std::vector<int>> by_user;
  for (const auto& [user, pos] : selection) by_user[user].push_back(pos);
  std::vector<std::vector<int>> groups;
  for (auto& [user, positions] : by_user) {
    std::sort(positions.begin(), positions.end());
    groups.push_back(positions);
  }
  std::sort(groups.begin(), groups.end());
  return groups;
}

std::vector<double> MergedRow(const SubTupleLaw& ordered,
                              const std::vector<std::vector<int>>& groups,
                              const TupleAlphabet& outputs) {
  SubTupleLaw acc = {{{}, 1.0}};
  for (const std::vector<int>& positions : groups) {
    SubTupleLaw part;
    for (const auto& [tuple, mass] : ordered) {
      std::vector<int> sub;
      for (int pos : positions) sub.push_back(tuple[pos]);
      part[sub] += mass;
    }
    SubTupleLaw next;
    for (const auto& [prefix, a] : acc) {
      for (const auto& [sub, b] : part) {
        std::vector<int> key = prefix;
        key.insert(key.end(), sub.begin(), sub.end());
        std::sort(key.begin(), key.end());
        next[key] += a * b;
      }
    }
    acc = std::move(next);
  }
  std::vector<double> row(outputs.size(), 0.0);
  for (const auto& [key, mass] : acc) row[outputs.Index(key)] += mass;
  return row;
}

absl::Status CheckMergeScale(const MultiMessageRandomizer& randomizer, int n) {
  if (n < 1 || n > 8 || randomizer.outputs.arity() > 3) {
    return absl::ResourceExhaustedError(
        "merged randomizers need n <= 8 and arity <= 3");
  }
  return absl::OkStatus();
}

}  // namespace

double HockeyStickRows(const std::vector<double>& p,
                       const std::vector<double>& q, double eps) {
  const double scale = std::exp(eps);
  CompensatedSum sum;
  for (size_t z = 0; z < p.size(); ++z) {
    const double diff = p[z] - scale * q[z];
    if (diff > 0.0) sum.Add(diff);
  }
  return sum.value();
}

double DominationResidual(const RandomizerMatrix& randomizer,
                          const std::vector<double>& dominating, double eps) {
  double worst = 0.0;
  for (int x = 0; x < randomizer.num_inputs(); ++x) {
    worst = std::max(worst,
                     HockeyStickRows(randomizer.row(x), dominating, eps));
  }
  return worst;
}

absl::StatusOr<DominationCertificate> FindMinDomination(
    const RandomizerMatrix& randomizer, double delta) {
  if (!(delta >= 0.0) || !(delta < 1.0)) {
    return absl::InvalidArgumentError("delta must lie in [0, 1)");
  }
  const int X = randomizer.num_inputs(), M = randomizer.num_messages();
  std::vector<double> t(M, 0.0);
  if (delta == 0.0) {
    for (int x = 0; x < X; ++x) {
      for (int z = 0; z < M; ++z) t[z] = std::max(t[z], randomizer(x, z));
    }
  } else {
    // min sum_z t_z  s.t.  t_z + s_xz - w_xz = p_xz,  sum_z s_xz + o_x = delta.
    const int vars = M + 2 * X * M + X;
    auto s_col = [&](int x, int z) { return M + x * M + z; };
    auto w_col = [&](int x, int z) { return M + X * M + x * M + z; };
    lp::Problem problem;
    problem.c.assign(vars, 0.0);
    for (int z = 0; z < M; ++z) problem.c[z] = 1.0;
    for (int x = 0; x < X; ++x) {
      for (int z = 0; z < M; ++z) {
        std::vector<double> row(vars, 0.0);
        row[z] = 1.0;
        row[s_col(x, z)] = 1.0;
        row[w_col(x, z)] = -1.0;
        problem.a.push_back(std::move(row));
        problem.b.push_back(randomizer(x, z));
      }
    }
    for (int x = 0; x < X; ++x) {
      std::vector<double> row(vars, 0.0);
      for (int z = 0; z < M; ++z) row[s_col(x, z)] = 1.0;
      row[M + 2 * X * M + x] = 1.0;
      problem.a.push_back(std::move(row));
      problem.b.push_back(delta);
    }
    ASSIGN_OR_RETURN(lp::Solution solution, lp::Solve(problem));
    if (solution.outcome != lp::Outcome::kOptimal) {
      return absl::InternalError("domination LP did not reach an optimum");
    }
    for (int z = 0; z < M; ++z) t[z] = std::max(0.0, solution.x[z]);
  }
  const double total = StableSum(t);
  if (!(total > 0.0)) return absl::InternalError("empty dominating measure");
  DominationCertificate cert;
  cert.epsilon_star = std::max(0.0, std::log(total));
  cert.dominating.resize(M);
  for (int z = 0; z < M; ++z) cert.dominating[z] = t[z] / total;
  cert.residual_delta =
      DominationResidual(randomizer, cert.dominating, cert.epsilon_star);
  return cert;
}

double ExactLdpEpsilon(const RandomizerMatrix& randomizer, double delta) {
  const int X = randomizer.num_inputs(), M = randomizer.num_messages();
  const double inf = std::numeric_limits<double>::infinity();
  double worst = 0.0;
  for (int a = 0; a < X; ++a) {
    for (int b = 0; b < X; ++b) {
      if (a == b) continue;
      const std::vector<double>& p = randomizer.row(a);
      const std::vector<double>& q = randomizer.row(b);
      double max_log_ratio = 0.0;
      CompensatedSum unmatched;
      for (int z = 0; z < M; ++z) {
        if (p[z] <= 0.0) continue;
        if (q[z] <= 0.0) {
          unmatched.Add(p[z]);
        } else {
          max_log_ratio = std::max(max_log_ratio, std::log(p[z] / q[z]));
        }
      }
      if (unmatched.value() > delta) return inf;
      if (HockeyStickRows(p, q, 0.0) <= delta) continue;
      if (delta == 0.0) {
        worst = std::max(worst, max_log_ratio);
        continue;
      }
      double lo = 0.0, hi = max_log_ratio;
      for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, hi); ++it) {
        const double mid = (lo + hi) / 2;
        if (HockeyStickRows(p, q, mid) <= delta) {
          hi = mid;
        } else {
          lo = mid;
        }
      }
      worst = std::max(worst, hi);
    }
  }
  return worst;
}

absl::StatusOr<MultiMessageRandomizer> MergedRandomizer(
    const MultiMessageRandomizer& randomizer,
    std::vector<std::pair<int, int>> selection) {
  const int k = randomizer.outputs.arity();
  if (static_cast<int>(selection.size()) != k) {
    return absl::InvalidArgumentError(
        absl::StrCat("selection has ", selection.size(), " cells, need ", k));
  }
  std::sort(selection.begin(), selection.end());
  if (std::adjacent_find(selection.begin(), selection.end()) !=
      selection.end()) {
    return absl::InvalidArgumentError("selection cells must be distinct");
  }
  int n = 0;
  for (const auto& [user, pos] : selection) {
    if (user < 0 || pos < 0 || pos >= k) {
      return absl::OutOfRangeError("selection cell outside [n] x [k]");
    }
    n = std::max(n, user + 1);
  }
  RETURN_IF_ERROR(CheckMergeScale(randomizer, n));
  const std::vector<SubTupleLaw> ordered = OrderedLaws(randomizer);
  const std::vector<std::vector<int>> groups = Groups(selection);
  std::vector<std::vector<double>> rows;
  for (const SubTupleLaw& law : ordered) {
    rows.push_back(MergedRow(law, groups, randomizer.outputs));
  }
  ASSIGN_OR_RETURN(RandomizerMatrix matrix,
                   RandomizerMatrix::Create(std::move(rows)));
  return MultiMessageRandomizer{std::move(matrix), randomizer.outputs};
}

absl::StatusOr<MultiMessageRandomizer> RandomMergedRandomizer(
    const MultiMessageRandomizer& randomizer, int n) {
  RETURN_IF_ERROR(CheckMergeScale(randomizer, n));
  const int k = randomizer.outputs.arity();
  const int cells = n * k;
  const std::vector<SubTupleLaw> ordered = OrderedLaws(randomizer);
  const int X = randomizer.matrix.num_inputs();
  const int T = randomizer.outputs.size();
  // R^F depends on F only through the position sets of the users it touches.
  std::map<std::vector<std::vector<int>>, int64_t> patterns;
  std::vector<int> pick(k);
  for (int i = 0; i < k; ++i) pick[i] = i;
  while (true) {
    std::vector<std::pair<int, int>> selection;
    for (int cell : pick) selection.emplace_back(cell / k, cell % k);
    ++patterns[Groups(selection)];
    int i = k - 1;
    while (i >= 0 && pick[i] == cells - k + i) --i;
    if (i < 0) break;
    ++pick[i];
    for (int j = i + 1; j < k; ++j) pick[j] = pick[j - 1] + 1;
  }
  int64_t subsets = 0;
  for (const auto& [groups, count] : patterns) subsets += count;
  std::vector<std::vector<CompensatedSum>> acc(
      X, std::vector<CompensatedSum>(T));
  for (const auto& [groups, count] : patterns) {
    const double weight =
        static_cast<double>(count) / static_cast<double>(subsets);
    for (int x = 0; x < X; ++x) {
      const std::vector<double> row =
          MergedRow(ordered[x], groups, randomizer.outputs);
      for (int t = 0; t < T; ++t) acc[x][t].Add(weight * row[t]);
    }
  }
  std::vector<std::vector<double>> rows(X, std::vector<double>(T));
  for (int x = 0; x < X; ++x) {
    for (int t = 0; t < T; ++t) rows[x][t] = acc[x][t].value();
  }
  ASSIGN_OR_RETURN(RandomizerMatrix matrix,
                   RandomizerMatrix::Create(std::move(rows)));
  return MultiMessageRandomizer{std::move(matrix), randomizer.outputs};
}

absl::StatusOr<double> ShuffleDelta(const MultiMessageRandomizer& randomizer,
                                    int n, double eps) {
  if (n < 1) return absl::InvalidArgumentError("n must be >= 1");
  const int X = randomizer.matrix.num_inputs();
  std::vector<TranscriptLaw> constant(X);
  for (int y = 0; y < X; ++y) {
    ASSIGN_OR_RETURN(Dataset data,
                     Dataset::Create(X, std::vector<int64_t>(n, y + 1)));
    ASSIGN_OR_RETURN(constant[y], ShuffledTranscriptLaw(randomizer, data));
  }
  double worst = 0.0;
  for (int x = 0; x < X; ++x) {
    for (int y = 0; y < X; ++y) {
      if (x == y) continue;
      std::vector<int64_t> entries(n, y + 1);
      entries[0] = x + 1;
      ASSIGN_OR_RETURN(Dataset data, Dataset::Create(X, std::move(entries)));
      ASSIGN_OR_RETURN(TranscriptLaw law,
                       ShuffledTranscriptLaw(randomizer, data));
      worst = std::max({worst, HockeyStick(law, constant[y], eps),
                        HockeyStick(constant[y], law, eps)});
    }
  }
  return worst;
}

absl::StatusOr<PseudoLocalReport> PseudoLocalCheck(
    const MultiMessageRandomizer& randomizer, int n, double eps,
    double delta) {
  ASSIGN_OR_RETURN(MultiMessageRandomizer merged,
                   RandomMergedRandomizer(randomizer, n));
  PseudoLocalReport report;
  const int k = randomizer.outputs.arity();
  report.epsilon_used = eps + k * (1 + std::log(static_cast<double>(n)));
  const int X = randomizer.matrix.num_inputs();
  for (int x = 0; x < X; ++x) {
    for (int y = 0; y < X; ++y) {
      report.worst = std::max(
          report.worst, HockeyStickRows(randomizer.matrix.row(x),
                                        merged.matrix.row(y),
                                        report.epsilon_used));
    }
  }
  report.pass = report.worst <= delta + 1e-12;
  return report;
}

}  // namespace audit
}  // namespace shuffledp
