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

#include "shuffledp/countdistinct.h"

#include <algorithm>
#include <cmath>
#include <exception>
#include <random>
#include <unordered_set>

#include "absl/strings/str_cat.h"
#include "boost/math/distributions/binomial.hpp"
#include "shuffledp/status_macros.h"

namespace shuffledp {
namespace countdistinct {
namespace {

// Constants with `users` (possibly fractional) in the q' formula and
// `trials` users in the binomial tail that fixes Delta.
absl::StatusOr<ProtocolParams> ComputeConstants(double users, int64_t trials,
                                                double epsilon, double delta) {
  ProtocolParams params;
  params.epsilon = std::min(epsilon, 1.0);
  params.delta = delta;
  params.epsilon0 = std::min(params.epsilon / 6, 0.01);
  params.q_prime = QPrime(users, params.epsilon0);
  int64_t t = 0;
  try {
    boost::math::binomial_distribution<double> bin(static_cast<double>(trials),
                                                   params.q_prime);
    t = static_cast<int64_t>(std::floor(trials * params.q_prime));
    while (t < trials &&
           boost::math::cdf(boost::math::complement(bin, static_cast<double>(
                                                             t))) >
               delta / 10) {
      ++t;
    }
    while (t > 0 && boost::math::cdf(boost::math::complement(
                        bin, static_cast<double>(t - 1))) <= delta / 10) {
      --t;
    }
  } catch (const std::exception& e) {
    return absl::InternalError(absl::StrCat("binomial tail: ", e.what()));
  }
  params.Delta = t + 1;
  const double x = 0.1 * params.epsilon0 / static_cast<double>(params.Delta);
  params.p = std::exp(-x);
  params.one_minus_p = -std::expm1(-x);
  params.r = 50 * std::exp(params.epsilon0 / params.Delta) *
             std::log(10 / delta);
  return params;
}

absl::Status CheckPrivacyPair(int64_t n, double epsilon, double delta) {
  if (n < 1) return absl::InvalidArgumentError("need at least one user");
  if (!(epsilon > 0.0)) {
    return absl::InvalidArgumentError(absl::StrCat("epsilon = ", epsilon));
  }
  if (!(delta > 0.0) || delta > 1.0 / static_cast<double>(n)) {
    return absl::InvalidArgumentError(
        absl::StrCat("delta = ", delta, " must lie in (0, 1/n]"));
  }
  return absl::OkStatus();
}

}  // namespace

dist::DistSpec ProtocolParams::UserNoise() const {
  return dist::DistSpec::NegativeBinomialFromComplement(noise_shape,
                                                        one_minus_p);
}

double ProtocolParams::UserNoiseMean() const {
  return noise_shape * p / one_minus_p;
}

double QPrime(double users, double epsilon0) {
  const double log_base = std::log(-std::expm1(-epsilon0));
  return -std::expm1(log_base / users) / 2;
}

absl::StatusOr<ProtocolParams> SetGlobalConstants(int64_t n, double epsilon,
                                                  double delta) {
  RETURN_IF_ERROR(CheckPrivacyPair(n, epsilon, delta));
  ASSIGN_OR_RETURN(ProtocolParams params,
                   ComputeConstants(static_cast<double>(n), n, epsilon, delta));
  params.n = n;
  params.noise_shape = params.r / static_cast<double>(n);
  return params;
}

absl::StatusOr<RobustParams> SetRobustConstants(int64_t n, double epsilon,
                                                double delta, double gamma) {
  RETURN_IF_ERROR(CheckPrivacyPair(n, epsilon, delta));
  if (!(gamma > 0.0) || gamma > 1.0) {
    return absl::InvalidArgumentError(absl::StrCat("gamma = ", gamma));
  }
  const double users = gamma * static_cast<double>(n);
  const int64_t trials =
      std::max<int64_t>(1, static_cast<int64_t>(std::ceil(users - 1e-9)));
  RobustParams robust;
  ASSIGN_OR_RETURN(robust.base,
                   ComputeConstants(users, trials, epsilon, delta));
  robust.base.n = n;
  robust.base.noise_shape = robust.base.r / users;
  robust.gamma = gamma;
  const double log_a = std::log(-std::expm1(-robust.base.epsilon0)) / gamma;
  robust.inv_tau_complement = std::exp(log_a);
  robust.tau = -1.0 / std::expm1(log_a);
  robust.min_participants = trials;
  return robust;
}

absl::StatusOr<TranscriptHistogram> Randomize(int64_t x, int64_t D,
                                              const ProtocolParams& params,
                                              Rng& rng) {
  if (x < 0 || x > D) {
    return absl::OutOfRangeError(absl::StrCat("input ", x, " outside [0, D]"));
  }
  TranscriptHistogram out;
  if (UniformDouble(rng) < 0.5 && x != 0) out.Add(x);
  const dist::DistSpec noise = params.UserNoise();
  for (int64_t i = 1; i <= D; ++i) {
    if (UniformDouble(rng) < params.q_prime) out.Add(i);
    out.Add(i, 2 * dist::Sample(noise, rng));
  }
  return out;
}

int64_t OddCoordinates(const TranscriptHistogram& hist, int64_t D) {
  int64_t odd = 0;
  for (const auto& [m, c] : hist.counts()) {
    if (m >= 1 && m <= D && (c & 1) != 0) ++odd;
  }
  return odd;
}

double EstimateFromOddCount(double odd, int64_t D, double ratio) {
  return (2 * odd * ratio - static_cast<double>(D)) / (ratio - 1);
}

double Analyze(const TranscriptHistogram& hist, int64_t D,
               const ProtocolParams& params) {
  return EstimateFromOddCount(static_cast<double>(OddCoordinates(hist, D)), D,
                              std::exp(params.epsilon0));
}

double RobustAnalyze(const TranscriptHistogram& hist, int64_t D,
                     const RobustParams& params) {
  // (2 C tau - D) / (tau - 1) rewritten in a = 1 - 1/tau.
  const double a = params.inv_tau_complement;
  return (2 * static_cast<double>(OddCoordinates(hist, D)) -
          static_cast<double>(D) * (1 - a)) /
         a;
}

absl::StatusOr<TranscriptHistogram> RunProtocol(const Dataset& dataset,
                                                const ProtocolParams& params,
                                                Engine engine, uint64_t seed) {
  const int64_t D = dataset.universe_size();
  if (engine == Engine::kPerUser) {
    ShuffleRandomizer randomizer = [&](int64_t x, const PublicRandomness*,
                                       Rng& rng) {
      return Randomize(x, D, params, rng);
    };
    return RunShuffle(randomizer, dataset, nullptr, seed);
  }
  std::vector<int64_t> holders(D + 1, 0);
  for (int64_t x : dataset.entries()) ++holders[x];
  const int64_t users = dataset.size();
  Rng rng = StreamRng(seed, 0);
  const dist::DistSpec noise = dist::DistSpec::NegativeBinomialFromComplement(
      params.noise_shape * static_cast<double>(users), params.one_minus_p);
  TranscriptHistogram out;
  for (int64_t i = 1; i <= D; ++i) {
    int64_t c = std::binomial_distribution<int64_t>(users, params.q_prime)(rng);
    if (holders[i] > 0) {
      c += std::binomial_distribution<int64_t>(holders[i], 0.5)(rng);
    }
    c += 2 * dist::Sample(noise, rng);
    out.Add(i, c);
  }
  return out;
}

double ExpectedMessagesPerUser(const ProtocolParams& params, int64_t D,
                               bool nonzero_input) {
  return (nonzero_input ? 0.5 : 0.0) +
         static_cast<double>(D) * (params.q_prime + 2 * params.UserNoiseMean());
}

double FnEval(int64_t n, int64_t m) {
  if (m == 0) return 0.0;
  if (n == 1) return 1.0;
  const double nd = static_cast<double>(n);
  return -nd * std::expm1(static_cast<double>(m) * std::log1p(-1.0 / nd));
}

int64_t FnInvert(int64_t n, double zhat) {
  // f_n is increasing: find the last m with f_n(m) <= zhat.
  int64_t lo = 0, hi = n;
  if (FnEval(n, hi) <= zhat) return n;
  while (hi - lo > 1) {
    const int64_t mid = lo + (hi - lo) / 2;
    if (FnEval(n, mid) <= zhat) lo = mid; else hi = mid;
  }
  if (zhat < FnEval(n, lo)) return lo;
  return std::abs(FnEval(n, hi) - zhat) < std::abs(FnEval(n, lo) - zhat) ? hi
                                                                         : lo;
}

absl::StatusOr<PublicCoinConfig> MakePublicCoinConfig(int64_t n,
                                                      double epsilon,
                                                      double delta) {
  PublicCoinConfig config;
  ASSIGN_OR_RETURN(config.params, SetGlobalConstants(n, epsilon, delta));
  const double per_coordinate =
      config.params.q_prime + 2 * config.params.UserNoiseMean();
  int64_t D = static_cast<int64_t>(
      std::min(static_cast<double>(n), std::floor(0.5 / per_coordinate)));
  while (D < n && ExpectedMessagesPerUser(config.params, D + 1) <= 1.0) ++D;
  while (D > 0 && ExpectedMessagesPerUser(config.params, D) > 1.0) --D;
  config.D = D;
  return config;
}

int64_t PublicCoinRemap(int64_t x, int64_t n, int64_t D,
                        const PublicRandomness& pub) {
  const int64_t z = pub.Permute(n, pub.Mapping(n, static_cast<uint64_t>(x)));
  return z <= D ? z : 0;
}

absl::StatusOr<PublicCoinResult> PublicCoinRun(
    const std::vector<int64_t>& inputs, double epsilon, double delta,
    const PublicRandomness& pub, uint64_t seed,
    const PublicCoinOptions& options) {
  const int64_t n = static_cast<int64_t>(inputs.size());
  ASSIGN_OR_RETURN(PublicCoinConfig config,
                   MakePublicCoinConfig(n, epsilon, delta));
  const int64_t D =
      options.universe_override > 0 ? options.universe_override : config.D;
  if (D < 1) {
    return absl::FailedPreconditionError(absl::StrCat(
        "trivial regime: no universe size D >= 1 keeps the expected messages "
        "per user <= 1 at n = ",
        n, " (", ExpectedMessagesPerUser(config.params, 1),
        " expected at D = 1)"));
  }
  std::vector<int64_t> mapped;
  mapped.reserve(n);
  for (int64_t x : inputs) mapped.push_back(PublicCoinRemap(x, n, D, pub));
  ASSIGN_OR_RETURN(Dataset dataset, Dataset::Create(D, std::move(mapped)));
  ASSIGN_OR_RETURN(TranscriptHistogram hist,
                   RunProtocol(dataset, config.params, options.engine, seed));
  PublicCoinResult result;
  result.D = D;
  result.base_estimate = Analyze(hist, D, config.params);
  result.messages_total = hist.total();
  result.estimate = static_cast<double>(FnInvert(
      n, result.base_estimate * static_cast<double>(n) / static_cast<double>(D)));
  return result;
}

absl::StatusOr<TranscriptHistogram> RobustRandomize(int64_t x, int64_t D,
                                                    const RobustParams& params,
                                                    Rng& rng) {
  return Randomize(x, D, params.base, rng);
}

absl::StatusOr<double> RobustRun(const Dataset& dataset, double epsilon,
                                 double delta, double gamma, Engine engine,
                                 uint64_t seed) {
  ASSIGN_OR_RETURN(
      RobustParams params,
      SetRobustConstants(dataset.size(), epsilon, delta, gamma));
  ASSIGN_OR_RETURN(TranscriptHistogram hist,
                   RunProtocol(dataset, params.base, engine, seed));
  return RobustAnalyze(hist, dataset.universe_size(), params);
}

absl::StatusOr<LocalWeakParams> MakeLocalWeakParams(int64_t n) {
  if (n < 2) return absl::InvalidArgumentError("need n >= 2");
  LocalWeakParams params;
  params.n = n;
  params.D = n;
  params.epsilon0 = 1.0;
  params.q_prime = QPrime(static_cast<double>(n), params.epsilon0);
  params.epsilon_local = std::log1p(-params.q_prime) - std::log(params.q_prime);
  return params;
}

std::vector<uint8_t> IndicatorHistogram::Dense() const {
  std::vector<uint8_t> out(D, 0);
  for (int64_t i : ones) out[i - 1] = 1;
  return out;
}

absl::StatusOr<IndicatorHistogram> LocalWeakRandomize(
    int64_t x, const LocalWeakParams& params, Rng& rng) {
  const int64_t D = params.D;
  if (x < 1 || x > D) {
    return absl::OutOfRangeError(absl::StrCat("input ", x, " outside [1, D]"));
  }
  IndicatorHistogram out;
  out.D = D;
  if (UniformDouble(rng) < 0.5) out.ones.push_back(x);
  // Each of the D - 1 other coordinates independently with probability q':
  // draw how many, then which (Floyd's sampling without replacement).
  const int64_t k =
      std::binomial_distribution<int64_t>(D - 1, params.q_prime)(rng);
  std::unordered_set<int64_t> chosen;
  for (int64_t j = D - 1 - k; j < D - 1; ++j) {
    const int64_t t = static_cast<int64_t>(UniformIndex(rng, j + 1));
    chosen.insert(chosen.count(t) ? j : t);
  }
  for (int64_t j : chosen) out.ones.push_back(j + 1 < x ? j + 1 : j + 2);
  std::sort(out.ones.begin(), out.ones.end());
  return out;
}

double LocalWeakAnalyze(const std::vector<IndicatorHistogram>& outputs,
                        const LocalWeakParams& params) {
  std::vector<int64_t> sums(params.D + 1, 0);
  for (const IndicatorHistogram& h : outputs) {
    for (int64_t i : h.ones) ++sums[i];
  }
  int64_t odd = 0;
  for (int64_t i = 1; i <= params.D; ++i) odd += sums[i] & 1;
  return EstimateFromOddCount(static_cast<double>(odd), params.D,
                              std::exp(params.epsilon0));
}

}  // namespace countdistinct
}  // namespace shuffledp
