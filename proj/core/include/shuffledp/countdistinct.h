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

// CountDistinct protocols in the shuffle model: the private-coin protocol,
// its public-coin wrapper, the robust variant, and the weak-privacy local
// protocol.

#ifndef SHUFFLEDP_COUNTDISTINCT_H_
#define SHUFFLEDP_COUNTDISTINCT_H_

#include <cstdint>
#include <vector>

#include "absl/status/statusor.h"
#include "shuffledp/distlib.h"
#include "shuffledp/rng.h"
#include "shuffledp/shuffle_core.h"

namespace shuffledp {
namespace countdistinct {

struct ProtocolParams {
  int64_t n = 0;
  double epsilon = 0.0;
  double delta = 0.0;
  double epsilon0 = 0.0;
  int64_t Delta = 0;
  double p = 0.0;
  // 1 - p, kept separately because p is within 1e-4 of 1.
  double one_minus_p = 0.0;
  double r = 0.0;
  double q_prime = 0.0;
  // Shape of each user's NB noise per coordinate: r / n, or r / (gamma n)
  // for the robust variant.
  double noise_shape = 0.0;

  // Per-user NB noise law for one coordinate.
  dist::DistSpec UserNoise() const;
  // E[NB(noise_shape, p)].
  double UserNoiseMean() const;
};

// Derived constants of the protocol. Delta is one more than the smallest t
// with Pr[Bin(n, q') > t] <= delta / 10.
absl::StatusOr<ProtocolParams> SetGlobalConstants(int64_t n, double epsilon,
                                                  double delta);

// (1 - (1 - e^{-eps0})^{1/users}) / 2, evaluated without cancellation.
double QPrime(double users, double epsilon0);

struct RobustParams {
  ProtocolParams base;
  double gamma = 1.0;
  // 1 / (1 - (1 - e^{-eps0})^{1/gamma}); equals e^{eps0} at gamma = 1.
  double tau = 0.0;
  // 1 - 1/tau = (1 - e^{-eps0})^{1/gamma}. Rounds to 0 in 1 - 1/tau once
  // gamma is small, so the analyzer works with it directly.
  double inv_tau_complement = 0.0;
  // Smallest number of participating users the privacy guarantee covers.
  int64_t min_participants = 0;
};

absl::StatusOr<RobustParams> SetRobustConstants(int64_t n, double epsilon,
                                                double delta, double gamma);

// One user's messages. Messages lie in [1, D].
absl::StatusOr<TranscriptHistogram> Randomize(int64_t x, int64_t D,
                                              const ProtocolParams& params,
                                              Rng& rng);

// Number of coordinates i in [1, D] whose count is odd.
int64_t OddCoordinates(const TranscriptHistogram& hist, int64_t D);

// (2 C ratio - D) / (ratio - 1) with C the number of odd coordinates.
double EstimateFromOddCount(double odd, int64_t D, double ratio);

// Raw estimate of the number of distinct nonzero inputs.
double Analyze(const TranscriptHistogram& hist, int64_t D,
               const ProtocolParams& params);
double RobustAnalyze(const TranscriptHistogram& hist, int64_t D,
                     const RobustParams& params);

enum class Engine {
  // Every user runs the randomizer on its own stream.
  kPerUser,
  // Draws each coordinate's count directly: Bin(users, q') plus
  // Bin(holders, 1/2) plus twice NB(users * noise_shape, p). Same law as
  // kPerUser.
  kAggregate,
};

absl::StatusOr<TranscriptHistogram> RunProtocol(const Dataset& dataset,
                                                const ProtocolParams& params,
                                                Engine engine, uint64_t seed);

// Expected messages per user for universe D: 1/2 (if the input is nonzero)
// plus D (q' + 2 E[NB]).
double ExpectedMessagesPerUser(const ProtocolParams& params, int64_t D,
                               bool nonzero_input = true);

double FnEval(int64_t n, int64_t m);
// argmin over m in {0..n} of |f_n(m) - zhat|, ties to the smaller m.
int64_t FnInvert(int64_t n, double zhat);

struct PublicCoinConfig {
  ProtocolParams params;
  // Largest universe with ExpectedMessagesPerUser <= 1. Zero means the
  // trivial regime.
  int64_t D = 0;
};

absl::StatusOr<PublicCoinConfig> MakePublicCoinConfig(int64_t n,
                                                      double epsilon,
                                                      double delta);

struct PublicCoinOptions {
  // Replaces the searched universe size when positive.
  int64_t universe_override = 0;
  Engine engine = Engine::kAggregate;
};

struct PublicCoinResult {
  double estimate = 0.0;
  double base_estimate = 0.0;
  int64_t D = 0;
  int64_t messages_total = 0;
};

// Maps each input through x -> pi(f(x)), keeps values <= D, runs the base
// protocol and inverts f_n. Returns FailedPrecondition in the trivial regime.
absl::StatusOr<PublicCoinResult> PublicCoinRun(
    const std::vector<int64_t>& inputs, double epsilon, double delta,
    const PublicRandomness& pub, uint64_t seed,
    const PublicCoinOptions& options = PublicCoinOptions());

// Input of one user after the public-coin remapping.
int64_t PublicCoinRemap(int64_t x, int64_t n, int64_t D,
                        const PublicRandomness& pub);

absl::StatusOr<TranscriptHistogram> RobustRandomize(int64_t x, int64_t D,
                                                    const RobustParams& params,
                                                    Rng& rng);

// Robust protocol with every user participating.
absl::StatusOr<double> RobustRun(const Dataset& dataset, double epsilon,
                                 double delta, double gamma, Engine engine,
                                 uint64_t seed);

struct LocalWeakParams {
  int64_t n = 0;
  int64_t D = 0;
  double epsilon0 = 1.0;
  double q_prime = 0.0;
  // ln((1 - q') / q').
  double epsilon_local = 0.0;
};

absl::StatusOr<LocalWeakParams> MakeLocalWeakParams(int64_t n);

// 0/1 histogram of one user's messages, stored sparsely.
struct IndicatorHistogram {
  int64_t D = 0;
  // Sorted coordinates in [1, D] with value 1.
  std::vector<int64_t> ones;

  std::vector<uint8_t> Dense() const;
};

absl::StatusOr<IndicatorHistogram> LocalWeakRandomize(
    int64_t x, const LocalWeakParams& params, Rng& rng);

double LocalWeakAnalyze(const std::vector<IndicatorHistogram>& outputs,
                        const LocalWeakParams& params);

}  // namespace countdistinct
}  // namespace shuffledp

#endif  // SHUFFLEDP_COUNTDISTINCT_H_
