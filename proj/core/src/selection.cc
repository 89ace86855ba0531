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

#include "shuffledp/selection.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "absl/strings/str_cat.h"
#include "shuffledp/distlib.h"
#include "shuffledp/status_macros.h"

namespace shuffledp {
namespace selection {
namespace {

int64_t Mod(int64_t a, int64_t m) {
  const int64_t r = a % m;
  return r < 0 ? r + m : r;
}

// Smallest t with Pr[NB(shape, p) > t] <= tail.
absl::StatusOr<int64_t> NoiseQuantile(double shape, double p, double tail) {
  ASSIGN_OR_RETURN(
      dist::DiscretePMF pmf,
      dist::PmfOf(dist::DistSpec::NegativeBinomial(shape, p), 1e-15));
  double above = 1.0;
  for (int64_t i = 0; i < pmf.size(); ++i) {
    above -= pmf.masses[i];
    if (above <= tail) return pmf.offset + i;
  }
  return pmf.max_value();
}

}  // namespace

int64_t SharesFor(int64_t n, int64_t D, int64_t m, double delta) {
  const double N = static_cast<double>(n) * m / static_cast<double>(D);
  const double delta0 = delta / (2.0 * m);
  return static_cast<int64_t>(
             std::ceil(std::log(1 / delta0) / std::log(std::max(N, 2.0)))) +
         1;
}

int64_t CalibratedUsers(int64_t D, int64_t k, double delta) {
  return static_cast<int64_t>(std::ceil(kUserConstant * D /
                                        std::sqrt(static_cast<double>(k)) *
                                        std::log(1 / delta)));
}

absl::StatusOr<SelectionParams> Setup(int64_t D, int64_t k, double epsilon,
                                      double delta, int64_t n) {
  if (D < 1 || k < 1) return absl::InvalidArgumentError("need D, k >= 1");
  if (k > D) {
    return absl::InvalidArgumentError(absl::StrCat("k = ", k, " > D = ", D));
  }
  if (!(epsilon > 0.0) || !(delta > 0.0) || delta >= 1.0) {
    return absl::InvalidArgumentError("need epsilon > 0, delta in (0, 1)");
  }
  SelectionParams params;
  params.D = D;
  params.k = k;
  params.n = n > 0 ? n : CalibratedUsers(D, k, delta);
  params.epsilon = epsilon;
  params.delta = delta;
  for (int64_t m = std::min(k, D); m >= 1; --m) {
    if (m * SharesFor(params.n, D, m, delta) <= k) {
      params.m = m;
      break;
    }
  }
  if (params.m == 0) {
    return absl::InvalidArgumentError(
        absl::StrCat("no coordinate count m >= 1 fits k = ", k));
  }
  const int64_t m = params.m;
  params.shares = SharesFor(params.n, D, m, delta);
  params.N = static_cast<double>(params.n) * m / static_cast<double>(D);
  params.epsilon0 = epsilon / (2 * std::sqrt(2 * m * std::log(2 / delta)));
  params.delta0 = delta / (2.0 * m);
  const double log_tail = std::log(1 / params.delta0);
  params.participant_low = std::max<int64_t>(
      1, static_cast<int64_t>(
             std::floor(params.N - std::sqrt(2 * params.N * log_tail))));
  params.participant_cap = std::min<int64_t>(
      params.n, static_cast<int64_t>(std::ceil(
                    params.N + std::sqrt(3 * params.N * log_tail) + log_tail)));
  params.noise_p = std::exp(-params.epsilon0);
  params.noise_shape = 1.0 / static_cast<double>(params.participant_low);
  const double aggregate_shape =
      static_cast<double>(params.participant_cap) * params.noise_shape;
  ASSIGN_OR_RETURN(params.noise_cap,
                   NoiseQuantile(aggregate_shape, params.noise_p,
                                 params.delta0 / 4));
  const int64_t span = 2 * (params.participant_cap + params.noise_cap);
  params.modulus = 2;
  while (params.modulus <= span) params.modulus *= 2;
  return params;
}

absl::StatusOr<std::vector<int64_t>> SplitMixEncode(int64_t value,
                                                    int64_t shares,
                                                    int64_t modulus, Rng& rng) {
  if (modulus < 2) return absl::InvalidArgumentError("modulus < 2");
  if (shares < 1) return absl::InvalidArgumentError("shares < 1");
  if (value < 0 || value >= modulus) {
    return absl::OutOfRangeError(absl::StrCat("value ", value));
  }
  std::vector<int64_t> out(shares);
  int64_t sum = 0;
  for (int64_t i = 0; i + 1 < shares; ++i) {
    out[i] = static_cast<int64_t>(UniformIndex(rng, modulus));
    sum = (sum + out[i]) % modulus;
  }
  out[shares - 1] = Mod(value - sum, modulus);
  return out;
}

Message EncodeShare(int64_t j, int64_t share, const SelectionParams& params) {
  return (j - 1) * params.modulus + share;
}

absl::StatusOr<TranscriptHistogram> Randomize(const BitVector& x,
                                              const SelectionParams& params,
                                              Rng& rng) {
  if (static_cast<int64_t>(x.size()) != params.D) {
    return absl::InvalidArgumentError("input length differs from D");
  }
  if (params.m * params.shares > params.k) {
    return absl::InternalError("message budget exceeded");
  }
  // Partial Fisher-Yates: the first m entries are a uniform m-subset.
  std::vector<int64_t> coords(params.D);
  std::iota(coords.begin(), coords.end(), int64_t{1});
  for (int64_t i = 0; i < params.m; ++i) {
    const int64_t j =
        i + static_cast<int64_t>(UniformIndex(rng, params.D - i));
    std::swap(coords[i], coords[j]);
  }
  const dist::DistSpec noise =
      dist::DistSpec::NegativeBinomial(params.noise_shape, params.noise_p);
  TranscriptHistogram out;
  for (int64_t i = 0; i < params.m; ++i) {
    const int64_t j = coords[i];
    int64_t value = x[j - 1] ? 1 : 0;
    if (params.add_noise) {
      value += dist::Sample(noise, rng) - dist::Sample(noise, rng);
    }
    ASSIGN_OR_RETURN(std::vector<int64_t> shares,
                     SplitMixEncode(Mod(value, params.modulus), params.shares,
                                    params.modulus, rng));
    for (int64_t s : shares) out.Add(EncodeShare(j, s, params));
  }
  if (out.total() > params.k) {
    return absl::InternalError("message budget exceeded");
  }
  return out;
}

SelectionOutcome Analyze(const TranscriptHistogram& hist,
                         const SelectionParams& params) {
  const int64_t D = params.D;
  const int64_t M = params.modulus;
  std::vector<int64_t> sums(D, 0), messages(D, 0);
  for (const auto& [id, count] : hist.counts()) {
    const int64_t j = id / M;
    if (j < 0 || j >= D) continue;
    const int64_t share = id % M;
    sums[j] = static_cast<int64_t>(
        (static_cast<__int128>(sums[j]) + static_cast<__int128>(share) * count) %
        M);
    messages[j] += count;
  }
  SelectionOutcome out;
  out.estimates.assign(D, 0.0);
  out.decoded_sums.assign(D, 0);
  out.participants.assign(D, 0);
  const double scale = static_cast<double>(D) / static_cast<double>(params.m);
  for (int64_t j = 0; j < D; ++j) {
    out.participants[j] = messages[j] / params.shares;
    if (out.participants[j] == 0) {
      out.zero_participant_coordinates.push_back(j + 1);
      continue;
    }
    const int64_t signed_sum = sums[j] > M / 2 ? sums[j] - M : sums[j];
    out.decoded_sums[j] = signed_sum;
    out.estimates[j] = scale * static_cast<double>(signed_sum);
  }
  int64_t best = 0;
  for (int64_t j = 1; j < D; ++j) {
    if (out.estimates[j] > out.estimates[best]) best = j;
  }
  out.coordinate = best + 1;
  return out;
}

absl::StatusOr<TranscriptHistogram> RunProtocol(
    const std::vector<BitVector>& inputs, const SelectionParams& params,
    uint64_t seed) {
  TranscriptHistogram out;
  for (size_t i = 0; i < inputs.size(); ++i) {
    Rng rng = StreamRng(seed, i);
    ASSIGN_OR_RETURN(TranscriptHistogram h, Randomize(inputs[i], params, rng));
    out.Merge(h);
  }
  return out;
}

std::vector<BitVector> SamplePlanted(int64_t n, int64_t D, int64_t planted,
                                     double high, double low, Rng& rng) {
  std::vector<BitVector> out(n, BitVector(D, 0));
  for (auto& row : out) {
    for (int64_t j = 0; j < D; ++j) {
      row[j] = UniformDouble(rng) < (j + 1 == planted ? high : low) ? 1 : 0;
    }
  }
  return out;
}

std::vector<int64_t> ColumnSums(const std::vector<BitVector>& inputs) {
  if (inputs.empty()) return {};
  std::vector<int64_t> sums(inputs.front().size(), 0);
  for (const auto& row : inputs) {
    for (size_t j = 0; j < row.size(); ++j) sums[j] += row[j];
  }
  return sums;
}

bool Succeeds(const std::vector<BitVector>& inputs, int64_t j) {
  const std::vector<int64_t> sums = ColumnSums(inputs);
  if (j < 1 || j > static_cast<int64_t>(sums.size())) return false;
  const int64_t best = *std::max_element(sums.begin(), sums.end());
  return static_cast<double>(sums[j - 1]) >=
         static_cast<double>(best) - static_cast<double>(inputs.size()) / 10;
}

}  // namespace selection
}  // namespace shuffledp
