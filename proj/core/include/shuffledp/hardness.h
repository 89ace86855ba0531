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

// Hard-instance generators: moment-matched pairs, Poissonized datasets, good
// noise subsets, parity mixtures, and Boolean Fourier utilities.

#ifndef SHUFFLEDP_HARDNESS_H_
#define SHUFFLEDP_HARDNESS_H_

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "absl/status/statusor.h"
#include "shuffledp/randomizer_matrix.h"
#include "shuffledp/rng.h"
#include "shuffledp/shuffle_core.h"

namespace shuffledp {
namespace hardness {

// Two distributions on a common finite support in {0} U [1, Lambda].
struct MomentPair {
  std::vector<double> support;
  std::vector<double> u_masses;
  std::vector<double> v_masses;
  int L = 0;
  double Lambda = 0.0;
  // U({0}) - V({0}).
  double gap = 0.0;
};

// Maximizes U_0 - V_0 over distributions on {0} U {1, 1 + step, ..., Lambda}
// with E[U] = E[V] = 1 and equal moments up to order L. The optimal basis is
// re-solved in 50-digit arithmetic before rounding to double.
absl::StatusOr<MomentPair> MatchMoments(int L, double Lambda,
                                        double grid_step);

struct MomentReport {
  // max over j in [1, L] of |E[U^j] - E[V^j]| / max(1, E[U^j]).
  double max_relative_mismatch = 0.0;
  double mean_u = 0.0;
  double mean_v = 0.0;
  double mass_u = 0.0;
  double mass_v = 0.0;
  double gap = 0.0;
};

// Moments recomputed in 50-digit arithmetic from the stored masses.
MomentReport VerifyMoments(const MomentPair& pair);

struct LambdaSweep {
  // Smallest c (to `resolution`) with gap > target at Lambda = c L^2.
  double c = 0.0;
  MomentPair pair;
};

absl::StatusOr<LambdaSweep> MinimalLambdaConstant(int L, double grid_step,
                                                  double target_gap = 0.9,
                                                  double c_max = 40.0,
                                                  double resolution = 0.05);

std::string MomentPairToJson(const MomentPair& pair);
absl::StatusOr<MomentPair> MomentPairFromJson(std::string_view json);

enum class Side { kU, kV };

struct PoissonizedSpec {
  int64_t D = 0;
  int64_t n = 0;
  Side side = Side::kU;
  // Noise support, elements of [1, D].
  std::vector<int64_t> E;
};

struct PoissonizedDataset {
  // Signal users first, then noise users.
  Dataset dataset;
  int64_t signal_size = 0;
};

// For each i in [D], Poi(lambda_i) users hold i with lambda_i drawn from the
// chosen side of `pair`; for each j in E, Poi(n / |E|) users hold j.
absl::StatusOr<PoissonizedDataset> SamplePoissonized(
    const PoissonizedSpec& spec, const MomentPair& pair, Rng& rng);

// Deletes uniformly random users until at most `target_n` remain. Survivors
// keep their relative order.
Dataset TrimDataset(const Dataset& dataset, int64_t target_n, Rng& rng);

// Includes each element of [D] independently with probability epsilon1.
absl::StatusOr<std::vector<int64_t>> SampleGoodSubset(int64_t D,
                                                      double epsilon1,
                                                      Rng& rng);

struct GoodSubsetVerdict {
  bool good = false;
  std::string reason;
  // min over inputs of Pr_{z ~ R(i)}[nu_z >= 2 Lambda^2 mu_z].
  double worst_probability = 0.0;
};

// Row i - 1 of `randomizer` is R(i) for i in [D].
GoodSubsetVerdict VerifyGoodSubset(const std::vector<int64_t>& E,
                                   const RandomizerMatrix& randomizer,
                                   double Lambda, int64_t n,
                                   double epsilon1 = 0.01);

// Points of {0,1}^D are integers in [0, 2^D); bit j is coordinate j + 1.
struct ParityMixtureSpec {
  int D = 0;
  int ell = 0;
  uint64_t s = 0;
  double alpha = 0.0;
};

absl::Status ValidateParityMixture(const ParityMixtureSpec& spec);

// n draws; element x of {0,1}^D is stored as dataset entry x + 1 over the
// universe [2^D].
absl::StatusOr<Dataset> SampleParityMixture(const ParityMixtureSpec& spec,
                                            int64_t n, Rng& rng);

// alpha D_{ell,s} + (1 - alpha) uniform, as a table over {0,1}^D.
absl::StatusOr<std::vector<double>> ParityMixtureDistribution(
    const ParityMixtureSpec& spec);

// (1 - e^{-1} cosh(alpha)) n.
double ExpectedDistinct(double alpha, int64_t n);

inline constexpr int kMaxFourierDimension = 20;

// f is a table over {0,1}^D with 2^D entries.
absl::StatusOr<double> FourierCoefficient(const std::vector<double>& f,
                                          uint64_t s);
// All coefficients, indexed by s.
absl::StatusOr<std::vector<double>> FourierTransform(std::vector<double> f);
absl::StatusOr<double> Level1Weight(const std::vector<double>& f);

// E_{x ~ dist}[f(x)].
double Expectation(const std::vector<double>& f,
                   const std::vector<double>& dist);

}  // namespace hardness
}  // namespace shuffledp

#endif  // SHUFFLEDP_HARDNESS_H_
