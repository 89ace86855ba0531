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

// Dense two-phase simplex for small linear programs in standard form.

#ifndef SHUFFLEDP_LP_H_
#define SHUFFLEDP_LP_H_

#include <vector>

#include "absl/status/statusor.h"

namespace shuffledp {
namespace lp {

// minimize c^T x  subject to  A x = b,  x >= 0.
struct Problem {
  std::vector<std::vector<double>> a;  // rows
  std::vector<double> b;
  std::vector<double> c;
};

struct Options {
  double pivot_tolerance = 1e-12;
  double feasibility_tolerance = 1e-9;
  int max_iterations = 200000;
};

enum class Outcome { kOptimal, kInfeasible, kUnbounded };

struct Solution {
  Outcome outcome = Outcome::kOptimal;
  std::vector<double> x;
  double objective = 0.0;
  // Basic column of every row that survived redundancy removal.
  std::vector<int> basis;
  // Rows of A kept in the final basis, in the order matching `basis`.
  std::vector<int> rows;
  // Phase-one optimum: total artificial mass left when infeasible.
  double infeasibility = 0.0;
  // Farkas certificate for infeasibility: y with y^T A <= 0 componentwise
  // (up to tolerance) and y^T b > 0.
  std::vector<double> certificate;
};

absl::StatusOr<Solution> Solve(const Problem& problem,
                               const Options& options = Options());

}  // namespace lp
}  // namespace shuffledp

#endif  // SHUFFLEDP_LP_H_
