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

// Experiment drivers shared by the command line tool and the acceptance
// suite. Every driver is deterministic given its options and returns a JSON
// report with a pass verdict for its embedded assertions.

#ifndef SHUFFLEDP_TOOLS_EXPERIMENTS_H_
#define SHUFFLEDP_TOOLS_EXPERIMENTS_H_

#include <cstdint>
#include <string>
#include <vector>

#include "absl/status/statusor.h"
#include "json.hpp"
#include "shuffledp/auditor.h"
#include "shuffledp/countdistinct.h"
#include "shuffledp/randomizer_matrix.h"
#include "shuffledp/sq_bridge.h"

namespace shuffledp {
namespace experiments {

using Json = nlohmann::ordered_json;

struct Report {
  bool pass = false;
  // One line for terminals.
  std::string summary;
  Json data;
};

struct ParityIdentityOptions {
  std::vector<int64_t> ns = {1, 10, 1000, 100000};
  std::vector<double> eps0s = {0.01, 0.1};
  double tolerance = 1e-12;
};
absl::StatusOr<Report> ParityIdentity(const ParityIdentityOptions& options);

struct PrivacyAuditOptions {
  std::vector<int64_t> ns = {10000, 100000};
  std::vector<double> epsilons = {0.5, 1.0};
  std::vector<double> deltas = {1e-5, 1e-6};
  // Other holders of the changed element; 0 is the least noisy case.
  std::vector<int64_t> holders = {0, 1};
};
absl::StatusOr<Report> PrivacyAudit(const PrivacyAuditOptions& options);

struct CountDistinctOptions {
  int64_t n = 100000;
  int64_t D = 1000;
  double epsilon = 1.0;
  double delta = 1e-5;
  // Robust variant when in (0, 1).
  double gamma = 1.0;
  bool public_coin = false;
  int trials = 100;
  uint64_t seed = 1;
  countdistinct::Engine engine = countdistinct::Engine::kAggregate;
  // Inputs: zero with probability 1/3, else uniform over the first
  // `pool` values of [D] (0 picks 3D/5).
  int64_t pool = 0;
  // Error threshold c sqrt(D) / eps and the fraction of trials that must
  // meet it.
  double c = 300.0;
  double pass_rate = 0.95;
};
absl::StatusOr<Report> CountDistinctRun(const CountDistinctOptions& options);

struct MessageComplexityOptions {
  int64_t n = 100000;
  double epsilon = 1.0;
  double delta = 1e-5;
  int64_t invocations = 100000;
  // Universe of the base-protocol check.
  int64_t base_D = 10;
  // Smallest-scale public-coin instance with a nonempty universe; reported
  // but not gating. delta is 1 / n there.
  int64_t supplementary_n = 100000000;
  uint64_t seed = 1;
};
absl::StatusOr<Report> MessageComplexity(
    const MessageComplexityOptions& options);

struct LocalWeakOptions {
  std::vector<int64_t> ns = {100, 1000, 10000};
  int64_t accuracy_n = 10000;
  int trials = 100;
  double c = 4.0;
  double pass_rate = 0.95;
  uint64_t seed = 1;
};
absl::StatusOr<Report> LocalWeak(const LocalWeakOptions& options);

struct MomentMatchingOptions {
  std::vector<int> Ls = {4, 6, 8};
  // Lambda = c L^2.
  double c = 40.0;
  double grid_step = 0.5;
  double target_gap = 0.9;
  double tolerance = 1e-9;
};
absl::StatusOr<Report> MomentMatching(const MomentMatchingOptions& options);

struct PoissonTvOptions {
  int L = 8;
  int dimension = 16;
  double c = 40.0;
  double grid_step = 0.5;
  int64_t samples = 100000;
  int bootstrap_rounds = 200;
  uint64_t seed = 1;
};
absl::StatusOr<Report> PoissonTv(const PoissonTvOptions& options);

struct ParityDistinctOptions {
  int D = 14;
  std::vector<double> alphas = {0.0, 0.05, 0.1};
  int seeds = 100;
  double multiple = 10.0;
  double pass_rate = 0.99;
  uint64_t seed = 1;
};
absl::StatusOr<Report> ParityDistinct(const ParityDistinctOptions& options);

struct DominatedOptions {
  int instances = 100;
  uint64_t seed = 1;
};
absl::StatusOr<Report> Dominated(const DominatedOptions& options);

struct HsBoundOptions {
  double identity_tolerance = 1e-10;
  // Empty means the built-in grids.
  std::vector<audit::HsPoint> identity_grid;
  std::vector<audit::HsPoint> train;
  std::vector<audit::HsPoint> validate;
};
absl::StatusOr<Report> HsBound(const HsBoundOptions& options);
std::vector<audit::HsPoint> DefaultIdentityGrid();

struct SqSimulationOptions {
  // Randomized response with eps = ln 3 when empty.
  std::vector<std::vector<double>> matrix;
  // Uniform when empty.
  std::vector<double> input;
  double beta = 0.01;
  int64_t runs = 1000000;
  sq::NoiseMode mode = sq::NoiseMode::kWorstCase;
  uint64_t seed = 1;
};
absl::StatusOr<Report> SqSimulation(const SqSimulationOptions& options);

struct SelectionOptions {
  int64_t D = 64;
  int64_t k = 16;
  double epsilon = 1.0;
  double delta = 1e-4;
  // Planted coordinate is Ber(1/2 + gap), the rest Ber(1/2).
  double planted_gap = 0.4;
  // 0 selects the calibrated user count.
  int64_t n = 0;
  int trials = 100;
  double pass_rate = 0.9;
  uint64_t seed = 1;
};
absl::StatusOr<Report> SelectionRun(const SelectionOptions& options);

struct OracleEquivalenceOptions {
  int max_users = 3;
  double tolerance = 1e-12;
};
absl::StatusOr<Report> OracleEquivalence(
    const OracleEquivalenceOptions& options);

struct DistinguishOptions {
  int D = 8;
  int ell = 1;
  // Parity vector; 0 picks a seeded nonzero vector.
  uint64_t s = 0;
  double alpha = 0.05;
  // Each user flips every bit with probability 1 - keep.
  double keep = 0.75;
  int64_t n = 1000;
  int trials = 200;
  uint64_t seed = 1;
};
absl::StatusOr<Report> Distinguish(const DistinguishOptions& options);

// Trials needed to reach `rate` of `trials`.
int RequiredCount(double rate, int trials);

// Reads {"rows": [[...], ...]} or a bare array of rows.
absl::StatusOr<std::vector<std::vector<double>>> MatrixFromJson(
    const Json& json);

// Reads an array of {"m", "alpha", "beta", "eps"} objects.
absl::StatusOr<std::vector<audit::HsPoint>> HsPointsFromJson(const Json& json);

}  // namespace experiments
}  // namespace shuffledp

#endif  // SHUFFLEDP_TOOLS_EXPERIMENTS_H_
