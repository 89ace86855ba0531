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

#ifndef SHUFFLEDP_SQ_BRIDGE_H_
#define SHUFFLEDP_SQ_BRIDGE_H_

#include <cstdint>
#include <utility>
#include <vector>

#include "absl/status/statusor.h"
#include "shuffledp/auditor.h"
#include "shuffledp/randomizer_matrix.h"
#include "shuffledp/rng.h"

namespace shuffledp {
namespace sq {

enum class NoiseMode {
  kNone,
  // Perturbation of size tau with alternating sign.
  kWorstCase,
  // Perturbation uniform in [-tau, tau].
  kRandom,
};

enum class Codomain { kUnit, kSigned };

// Answers statistical queries about a fixed input distribution. Answers are
// the exact expectation moved by at most tau, then clamped to the codomain.
class SqOracle {
 public:
  static absl::StatusOr<SqOracle> Create(std::vector<double> distribution,
                                         NoiseMode mode, uint64_t seed = 0);

  // `g` holds g(x) for every input x.
  absl::StatusOr<double> Query(const std::vector<double>& g, double tau,
                               Codomain codomain = Codomain::kUnit);

  double Exact(const std::vector<double>& g) const;
  const std::vector<double>& distribution() const { return distribution_; }
  int64_t queries() const { return queries_; }

 private:
  SqOracle(std::vector<double> distribution, NoiseMode mode, uint64_t seed)
      : distribution_(std::move(distribution)), mode_(mode), rng_(seed) {}

  std::vector<double> distribution_;
  NoiseMode mode_;
  Rng rng_;
  int64_t queries_ = 0;
};

inline constexpr int64_t kMaxRejectionRounds = 1000000;

struct Draw {
  int message = 0;
  int64_t queries = 0;
};

// One draw from (approximately) R(U) for the oracle's distribution U, by
// rejection sampling against the certificate's dominating measure.
absl::StatusOr<Draw> SimulateDominated(
    const RandomizerMatrix& randomizer,
    const audit::DominationCertificate& cert, double beta, SqOracle& oracle,
    Rng& rng);

struct ShuffleDraws {
  std::vector<int> messages;
  int64_t queries = 0;
};

// n independent draws, each run with error budget beta / n.
absl::StatusOr<ShuffleDraws> SimulateShuffleBySq(
    const RandomizerMatrix& randomizer,
    const audit::DominationCertificate& cert, int64_t n, double beta,
    SqOracle& oracle, Rng& rng);

// Exact output law of the rejection sampler when the oracle moves the answer
// for message z by signs[z] * tau (then clamps to [0, 1]).
std::vector<double> SimulationLaw(const RandomizerMatrix& randomizer,
                                  const audit::DominationCertificate& cert,
                                  const std::vector<double>& input_dist,
                                  double beta, const std::vector<int>& signs);

struct SimulationCheck {
  // Largest distance of a per-message probability outside its interval,
  // over all sign patterns in {-1, 0, 1}^M. Zero when every value is inside.
  double max_violation = 0.0;
  // Largest TV distance to R(U) over the same patterns.
  double max_tv = 0.0;
  // Intervals [lo, hi] the per-message probabilities must lie in.
  std::vector<std::pair<double, double>> intervals;
};

absl::StatusOr<SimulationCheck> CheckSimulationExactly(
    const RandomizerMatrix& randomizer,
    const audit::DominationCertificate& cert,
    const std::vector<double>& input_dist, double beta);

}  // namespace sq
}  // namespace shuffledp

#endif  // SHUFFLEDP_SQ_BRIDGE_H_
