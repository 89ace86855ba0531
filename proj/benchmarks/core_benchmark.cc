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

#include <cstdint>
#include <vector>

#include "benchmark/benchmark.h"
#include "shuffledp/auditor.h"
#include "shuffledp/countdistinct.h"
#include "shuffledp/distlib.h"
#include "shuffledp/hardness.h"
#include "shuffledp/selection.h"
#include "shuffledp/shuffle_core.h"

namespace shuffledp {
namespace {

void BM_NegativeBinomialPmf(benchmark::State& state) {
  const double shape = static_cast<double>(state.range(0)) / 1000;
  for (auto _ : state) {
    auto pmf = dist::PmfOf(
        dist::DistSpec::NegativeBinomialFromComplement(shape, 0.01));
    benchmark::DoNotOptimize(pmf);
  }
}
BENCHMARK(BM_NegativeBinomialPmf)->Arg(10)->Arg(1000)->Arg(100000);

void BM_ProtocolAudit(benchmark::State& state) {
  auto params = *countdistinct::SetGlobalConstants(state.range(0), 1.0, 1e-5);
  for (auto _ : state) {
    auto audit = audit::AuditProtocol1d(params, 0);
    benchmark::DoNotOptimize(audit);
  }
}
BENCHMARK(BM_ProtocolAudit)->Arg(10000)->Arg(100000)->Unit(
    benchmark::kMillisecond);

void BM_CountDistinctRun(benchmark::State& state) {
  const int64_t n = 100000, D = 1000;
  std::vector<int64_t> entries(n);
  for (int64_t i = 0; i < n; ++i) entries[i] = i % 3 == 0 ? 0 : 1 + i % 600;
  const Dataset data = *Dataset::Create(D, entries);
  auto params = *countdistinct::SetGlobalConstants(n, 1.0, 1e-5);
  const auto engine = static_cast<countdistinct::Engine>(state.range(0));
  uint64_t seed = 0;
  for (auto _ : state) {
    auto hist = countdistinct::RunProtocol(data, params, engine, ++seed);
    benchmark::DoNotOptimize(countdistinct::Analyze(*hist, D, params));
  }
}
BENCHMARK(BM_CountDistinctRun)
    ->Arg(static_cast<int>(countdistinct::Engine::kAggregate))
    ->Unit(benchmark::kMillisecond);

void BM_SelectionRandomize(benchmark::State& state) {
  auto params = *selection::Setup(64, 16, 1.0, 1e-4);
  Rng rng(1);
  const selection::BitVector x(64, 1);
  for (auto _ : state) {
    auto h = selection::Randomize(x, params, rng);
    benchmark::DoNotOptimize(h);
  }
}
BENCHMARK(BM_SelectionRandomize);

void BM_Permute(benchmark::State& state) {
  const int64_t n = state.range(0);
  PublicRandomness pub("bench");
  pub.Permute(n, 1);
  int64_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(pub.Permute(n, 1 + (i++ % n)));
  }
}
BENCHMARK(BM_Permute)->Arg(1000000)->Arg(1000000000);

void BM_ExactShuffleDivergence(benchmark::State& state) {
  const double a = 0.75, b = 0.25;
  auto r = *MakeMultiMessage(
      *RandomizerMatrix::Create({{a * a, 2 * a * b, b * b},
                                 {b * b, 2 * a * b, a * a}}),
      2, 2);
  const int n = static_cast<int>(state.range(0));
  const Dataset d1 = *Dataset::Create(2, std::vector<int64_t>(n, 1));
  std::vector<int64_t> other(n, 1);
  other[0] = 2;
  const Dataset d2 = *Dataset::Create(2, other);
  for (auto _ : state) {
    benchmark::DoNotOptimize(audit::ExactShuffleDivergence(r, d1, d2, 0.5));
  }
}
BENCHMARK(BM_ExactShuffleDivergence)->DenseRange(2, 6, 2);

void BM_FindMinDomination(benchmark::State& state) {
  const int size = static_cast<int>(state.range(0));
  Rng rng(3);
  std::vector<std::vector<double>> rows(size, std::vector<double>(size));
  for (auto& row : rows) {
    double total = 0.0;
    for (double& v : row) total += v = 0.1 + UniformDouble(rng);
    for (double& v : row) v /= total;
  }
  const RandomizerMatrix m = *RandomizerMatrix::Create(rows);
  const double delta = state.range(1) / 100.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(audit::FindMinDomination(m, delta));
  }
}
BENCHMARK(BM_FindMinDomination)->Args({8, 0})->Args({8, 5})->Args({32, 5});

void BM_MatchMoments(benchmark::State& state) {
  const int L = static_cast<int>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(hardness::MatchMoments(L, 40.0 * L * L, 0.5));
  }
}
BENCHMARK(BM_MatchMoments)->Arg(4)->Arg(8)->Unit(benchmark::kMillisecond);

void BM_HsExact(benchmark::State& state) {
  const int64_t m = state.range(0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(audit::HsExact(m, 0.9, 0.003, 1.0));
  }
}
BENCHMARK(BM_HsExact)->Arg(100)->Arg(10000);

}  // namespace
}  // namespace shuffledp

BENCHMARK_MAIN();
