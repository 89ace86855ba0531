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
#include <bit>
#include <cmath>
#include <random>
#include <unordered_set>

#include "absl/strings/str_cat.h"
#include "shuffledp/hardness.h"
#include "shuffledp/numeric.h"
#include "shuffledp/status_macros.h"

namespace shuffledp {
namespace hardness {
namespace {

int64_t PoissonDraw(double mean, Rng& rng) {
  if (!(mean > 0.0)) return 0;
  return std::poisson_distribution<int64_t>(mean)(rng);
}

}  // namespace

absl::StatusOr<PoissonizedDataset> SamplePoissonized(
    const PoissonizedSpec& spec, const MomentPair& pair, Rng& rng) {
  if (spec.E.empty()) return absl::InvalidArgumentError("E is empty");
  for (int64_t j : spec.E) {
    if (j < 1 || j > spec.D) {
      return absl::OutOfRangeError(absl::StrCat("E element ", j));
    }
  }
  const std::vector<double>& weights =
      spec.side == Side::kU ? pair.u_masses : pair.v_masses;
  std::discrete_distribution<size_t> pick(weights.begin(), weights.end());
  std::vector<int64_t> entries;
  for (int64_t i = 1; i <= spec.D; ++i) {
    const double lambda = pair.support[pick(rng)];
    const int64_t count = PoissonDraw(lambda, rng);
    entries.insert(entries.end(), count, i);
  }
  const int64_t signal = static_cast<int64_t>(entries.size());
  const double rate =
      static_cast<double>(spec.n) / static_cast<double>(spec.E.size());
  for (int64_t j : spec.E) {
    const int64_t count = PoissonDraw(rate, rng);
    entries.insert(entries.end(), count, j);
  }
  ASSIGN_OR_RETURN(Dataset dataset, Dataset::Create(spec.D, std::move(entries)));
  return PoissonizedDataset{std::move(dataset), signal};
}

Dataset TrimDataset(const Dataset& dataset, int64_t target_n, Rng& rng) {
  const int64_t size = dataset.size();
  if (size <= target_n) return dataset;
  // Choose which users survive by a partial Fisher-Yates over indices.
  std::vector<int64_t> idx(size);
  for (int64_t i = 0; i < size; ++i) idx[i] = i;
  const int64_t keep = std::max<int64_t>(0, target_n);
  for (int64_t i = 0; i < keep; ++i) {
    const int64_t j = i + static_cast<int64_t>(UniformIndex(rng, size - i));
    std::swap(idx[i], idx[j]);
  }
  idx.resize(keep);
  std::sort(idx.begin(), idx.end());
  std::vector<int64_t> entries;
  entries.reserve(keep);
  for (int64_t i : idx) entries.push_back(dataset[i]);
  return *Dataset::Create(dataset.universe_size(), std::move(entries));
}

absl::StatusOr<std::vector<int64_t>> SampleGoodSubset(int64_t D,
                                                      double epsilon1,
                                                      Rng& rng) {
  if (!(epsilon1 > 0.0) || !(epsilon1 < 0.5)) {
    return absl::InvalidArgumentError("epsilon1 must lie in (0, 0.5)");
  }
  std::vector<int64_t> E;
  for (int64_t i = 1; i <= D; ++i) {
    if (UniformDouble(rng) < epsilon1) E.push_back(i);
  }
  return E;
}

GoodSubsetVerdict VerifyGoodSubset(const std::vector<int64_t>& E,
                                   const RandomizerMatrix& randomizer,
                                   double Lambda, int64_t n,
                                   double epsilon1) {
  GoodSubsetVerdict verdict;
  const int64_t D = randomizer.num_inputs();
  if (E.empty()) {
    verdict.reason = "E is empty";
    return verdict;
  }
  if (!(static_cast<double>(E.size()) < 2 * epsilon1 * D)) {
    verdict.reason = absl::StrCat("|E| = ", E.size(), " is not below 2 * ",
                                  epsilon1, " * ", D);
    return verdict;
  }
  const int M = randomizer.num_messages();
  std::vector<CompensatedSum> nu_acc(M), mu_acc(M);
  const double scale = static_cast<double>(n) / static_cast<double>(E.size());
  for (int64_t j : E) {
    if (j < 1 || j > D) {
      verdict.reason = absl::StrCat("E element ", j, " outside [1, D]");
      return verdict;
    }
    for (int z = 0; z < M; ++z) nu_acc[z].Add(scale * randomizer(j - 1, z));
  }
  for (int64_t i = 0; i < D; ++i) {
    for (int z = 0; z < M; ++z) mu_acc[z].Add(randomizer(i, z));
  }
  std::vector<char> covered(M);
  for (int z = 0; z < M; ++z) {
    covered[z] = nu_acc[z].value() >= 2 * Lambda * Lambda * mu_acc[z].value();
  }
  verdict.worst_probability = 1.0;
  for (int64_t i = 0; i < D; ++i) {
    CompensatedSum p;
    for (int z = 0; z < M; ++z) {
      if (covered[z]) p.Add(randomizer(i, z));
    }
    verdict.worst_probability = std::min(verdict.worst_probability, p.value());
  }
  const double need = 1 - 1 / (2 * Lambda);
  verdict.good = verdict.worst_probability >= need;
  if (!verdict.good) {
    verdict.reason = absl::StrCat("coverage probability ",
                                  verdict.worst_probability, " < ", need);
  }
  return verdict;
}

absl::Status ValidateParityMixture(const ParityMixtureSpec& spec) {
  if (spec.D < 1 || spec.D > 62) {
    return absl::InvalidArgumentError("D must lie in [1, 62]");
  }
  if (spec.s == 0) return absl::InvalidArgumentError("s must be nonzero");
  if ((spec.s >> spec.D) != 0) {
    return absl::InvalidArgumentError("s has bits beyond D");
  }
  if (spec.ell != 0 && spec.ell != 1) {
    return absl::InvalidArgumentError("ell must be 0 or 1");
  }
  if (!(spec.alpha >= 0.0) || spec.alpha > 1.0) {
    return absl::InvalidArgumentError("alpha must lie in [0, 1]");
  }
  return absl::OkStatus();
}

absl::StatusOr<Dataset> SampleParityMixture(const ParityMixtureSpec& spec,
                                            int64_t n, Rng& rng) {
  RETURN_IF_ERROR(ValidateParityMixture(spec));
  const uint64_t cube = uint64_t{1} << spec.D;
  const uint64_t low_bit = spec.s & (~spec.s + 1);
  std::vector<int64_t> entries(n);
  for (int64_t t = 0; t < n; ++t) {
    uint64_t x = UniformIndex(rng, cube);
    if (UniformDouble(rng) < spec.alpha &&
        (std::popcount(x & spec.s) & 1) != spec.ell) {
      x ^= low_bit;
    }
    entries[t] = static_cast<int64_t>(x) + 1;
  }
  return Dataset::Create(static_cast<int64_t>(cube), std::move(entries));
}

absl::StatusOr<std::vector<double>> ParityMixtureDistribution(
    const ParityMixtureSpec& spec) {
  RETURN_IF_ERROR(ValidateParityMixture(spec));
  if (spec.D > kMaxFourierDimension) {
    return absl::InvalidArgumentError("D too large for a table");
  }
  const uint64_t cube = uint64_t{1} << spec.D;
  const double base = (1 - spec.alpha) / static_cast<double>(cube);
  const double on = spec.alpha / static_cast<double>(cube / 2);
  std::vector<double> out(cube);
  for (uint64_t x = 0; x < cube; ++x) {
    const bool match = (std::popcount(x & spec.s) & 1) == spec.ell;
    out[x] = base + (match ? on : 0.0);
  }
  return out;
}

double ExpectedDistinct(double alpha, int64_t n) {
  return (1 - std::exp(-1.0) * std::cosh(alpha)) * static_cast<double>(n);
}

}  // namespace hardness
}  // namespace shuffledp
