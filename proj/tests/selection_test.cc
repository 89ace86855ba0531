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
#include <vector>

#include "boost/math/distributions/chi_squared.hpp"
#include "gmock/gmock.h"
#include "gtest/gtest.h"
#include "shuffledp/distlib.h"
#include "test_util.h"

namespace shuffledp {
namespace selection {
namespace {

using ::shuffledp::testing::StatusIs;

// Noiseless parameters with every knob set by hand.
SelectionParams Manual(int64_t D, int64_t k, int64_t m, int64_t shares,
                       int64_t modulus) {
  SelectionParams p;
  p.D = D;
  p.k = k;
  p.m = m;
  p.shares = shares;
  p.modulus = modulus;
  p.add_noise = false;
  return p;
}

dist::DiscretePMF Negate(const dist::DiscretePMF& a) {
  dist::DiscretePMF out;
  out.offset = -a.max_value();
  out.masses.assign(a.masses.rbegin(), a.masses.rend());
  return out;
}

TEST(SetupTest, ReferenceInstance) {
  ASSERT_OK_AND_ASSIGN(SelectionParams p, selection::Setup(64, 16, 1, 1e-4));
  EXPECT_EQ(p.n, CalibratedUsers(64, 16, 1e-4));
  EXPECT_EQ(p.n, static_cast<int64_t>(
                     std::ceil(kUserConstant * 64 / 4 * std::log(1e4))));
  EXPECT_GE(p.m, 1);
  EXPECT_LE(p.m * p.shares, 16);
  // m is the largest count that fits.
  EXPECT_GT((p.m + 1) * SharesFor(p.n, 64, p.m + 1, 1e-4), 16);
  EXPECT_DOUBLE_EQ(p.N, static_cast<double>(p.n) * p.m / 64);
  EXPECT_DOUBLE_EQ(p.epsilon0,
                   1 / (2 * std::sqrt(2 * p.m * std::log(2 / 1e-4))));
  EXPECT_DOUBLE_EQ(p.delta0, 1e-4 / (2 * p.m));
  EXPECT_EQ(p.shares,
            static_cast<int64_t>(std::ceil(std::log(1 / p.delta0) /
                                           std::log(std::max(p.N, 2.0)))) +
                1);
  const int64_t span = 2 * (p.participant_cap + p.noise_cap);
  EXPECT_GT(p.modulus, span);
  EXPECT_LE(p.modulus / 2, span);
  EXPECT_EQ(p.modulus & (p.modulus - 1), 0);
  EXPECT_LT(p.participant_low, p.N);
  EXPECT_GT(p.participant_cap, p.N);
}

TEST(SetupTest, BudgetHoldsOverSweep) {
  for (int64_t D : {4, 16, 64, 256, 1024}) {
    for (int64_t k = 1; k <= D; k = k < 8 ? k + 1 : 2 * k) {
      for (double delta : {1e-2, 1e-4, 1e-8}) {
        auto p = selection::Setup(D, k, 1, delta);
        if (!p.ok()) {
          EXPECT_THAT(p, StatusIs(absl::StatusCode::kInvalidArgument));
          EXPECT_GT(SharesFor(CalibratedUsers(D, k, delta), D, 1, delta), k);
          continue;
        }
        EXPECT_GE(p->m, 1);
        EXPECT_LE(p->m * p->shares, k) << D << " " << k << " " << delta;
      }
    }
  }
}

TEST(SetupTest, Errors) {
  EXPECT_THAT(selection::Setup(8, 9, 1, 1e-4), StatusIs(absl::StatusCode::kInvalidArgument));
  EXPECT_THAT(selection::Setup(8, 1, 1, 1e-4), StatusIs(absl::StatusCode::kInvalidArgument));
  EXPECT_THAT(selection::Setup(8, 4, 0, 1e-4), StatusIs(absl::StatusCode::kInvalidArgument));
}

TEST(SplitMixTest, SingleShareIsValue) {
  Rng rng(1);
  ASSERT_OK_AND_ASSIGN(std::vector<int64_t> s, SplitMixEncode(13, 1, 32, rng));
  EXPECT_THAT(s, ::testing::ElementsAre(13));
  EXPECT_THAT(SplitMixEncode(1, 2, 1, rng),
              StatusIs(absl::StatusCode::kInvalidArgument));
}

TEST(SplitMixTest, DecodingInvertsEncodingExhaustively) {
  Rng rng(2);
  for (int64_t modulus = 2; modulus <= 64; ++modulus) {
    for (int64_t shares : {1, 2, 3, 5}) {
      for (int64_t v = 0; v < modulus; ++v) {
        ASSERT_OK_AND_ASSIGN(std::vector<int64_t> s,
                             SplitMixEncode(v, shares, modulus, rng));
        ASSERT_EQ(static_cast<int64_t>(s.size()), shares);
        int64_t sum = 0;
        for (int64_t x : s) {
          ASSERT_GE(x, 0);
          ASSERT_LT(x, modulus);
          sum += x;
        }
        EXPECT_EQ(sum % modulus, v);
      }
    }
  }
}

TEST(SplitMixTest, EachShareIsUniform) {
  Rng rng(3);
  const int64_t modulus = 16;
  const int draws = 100000;
  for (int position = 0; position < 3; ++position) {
    std::vector<int> counts(modulus, 0);
    for (int i = 0; i < draws; ++i) {
      ++counts[(*SplitMixEncode(5, 3, modulus, rng))[position]];
    }
    double stat = 0.0;
    const double e = static_cast<double>(draws) / modulus;
    for (int c : counts) stat += (c - e) * (c - e) / e;
    boost::math::chi_squared chi(modulus - 1);
    EXPECT_GT(boost::math::cdf(boost::math::complement(chi, stat)), 0.01)
        << position;
  }
}

TEST(RandomizeTest, FullParticipationBoundary) {
  SelectionParams p = Manual(5, 10, 5, 2, 16);
  Rng rng(4);
  ASSERT_OK_AND_ASSIGN(TranscriptHistogram h,
                       Randomize(BitVector{1, 0, 1, 1, 0}, p, rng));
  EXPECT_EQ(h.total(), 10);
  SelectionOutcome out = Analyze(h, p);
  EXPECT_THAT(out.participants, ::testing::Each(1));
  EXPECT_THAT(out.decoded_sums, ::testing::ElementsAre(1, 0, 1, 1, 0));
}

TEST(RandomizeTest, NeverExceedsBudget) {
  ASSERT_OK_AND_ASSIGN(SelectionParams p, selection::Setup(64, 16, 1, 1e-4));
  Rng rng(5);
  std::vector<BitVector> xs = SamplePlanted(500, 64, 3, 0.9, 0.5, rng);
  for (const BitVector& x : xs) {
    ASSERT_OK_AND_ASSIGN(TranscriptHistogram h, Randomize(x, p, rng));
    EXPECT_EQ(h.total(), p.m * p.shares);
    EXPECT_LE(h.total(), p.k);
  }
  EXPECT_THAT(Randomize(BitVector(63, 0), p, rng),
              StatusIs(absl::StatusCode::kInvalidArgument));
  p.shares = 17;
  EXPECT_THAT(Randomize(xs[0], p, rng), StatusIs(absl::StatusCode::kInternal));
}

TEST(AnalyzeTest, NoiselessArgmaxAndTies) {
  SelectionParams p = Manual(8, 8, 4, 2, 512);
  std::vector<BitVector> e1(200, BitVector(8, 0));
  for (auto& x : e1) x[0] = 1;
  ASSERT_OK_AND_ASSIGN(TranscriptHistogram h, RunProtocol(e1, p, 6));
  EXPECT_EQ(Analyze(h, p).coordinate, 1);
  std::vector<BitVector> zeros(200, BitVector(8, 0));
  ASSERT_OK_AND_ASSIGN(TranscriptHistogram hz, RunProtocol(zeros, p, 7));
  EXPECT_EQ(Analyze(hz, p).coordinate, 1);
  EXPECT_THAT(Analyze(TranscriptHistogram(), p).zero_participant_coordinates,
              ::testing::SizeIs(8));
}

// With all-ones inputs the decoded sum is the participant count plus the
// aggregate noise, whose variance is 2 participants a p / (1 - p)^2.
TEST(AnalyzeTest, DecodedSumIsParticipantsPlusNoise) {
  ASSERT_OK_AND_ASSIGN(SelectionParams p, selection::Setup(16, 16, 1, 1e-4, 1000));
  std::vector<BitVector> ones(1000, BitVector(16, 1));
  std::vector<double> residual;
  double variance = 0.0;
  for (int s = 0; s < 40; ++s) {
    ASSERT_OK_AND_ASSIGN(TranscriptHistogram h, RunProtocol(ones, p, 100 + s));
    SelectionOutcome out = Analyze(h, p);
    int64_t total = 0;
    for (int64_t j = 0; j < 16; ++j) {
      total += out.participants[j];
      residual.push_back(out.decoded_sums[j] - out.participants[j]);
      variance += 2 * out.participants[j] * p.noise_shape * p.noise_p /
                  ((1 - p.noise_p) * (1 - p.noise_p));
    }
    EXPECT_EQ(total, 1000 * p.m);
  }
  variance /= residual.size();
  double mean = 0.0, second = 0.0;
  for (double r : residual) mean += r;
  mean /= residual.size();
  for (double r : residual) second += (r - mean) * (r - mean);
  second /= residual.size() - 1;
  EXPECT_NEAR(mean, 0.0, 4 * std::sqrt(variance / residual.size()));
  EXPECT_NEAR(second / variance, 1.0, 0.3);

  p.add_noise = false;
  ASSERT_OK_AND_ASSIGN(TranscriptHistogram h, RunProtocol(ones, p, 9));
  SelectionOutcome out = Analyze(h, p);
  EXPECT_EQ(out.decoded_sums, out.participants);
}

TEST(AnalyzeTest, LargeGapNoiselessFindsPlanted) {
  ASSERT_OK_AND_ASSIGN(SelectionParams p, selection::Setup(64, 16, 1, 1e-4));
  p.add_noise = false;
  Rng rng(10);
  std::vector<BitVector> xs = SamplePlanted(p.n, 64, 17, 0.95, 0.3, rng);
  ASSERT_OK_AND_ASSIGN(TranscriptHistogram h, RunProtocol(xs, p, 11));
  const int64_t j = Analyze(h, p).coordinate;
  EXPECT_EQ(j, 17);
  EXPECT_TRUE(Succeeds(xs, j));
}

TEST(SuccessTest, Predicate) {
  std::vector<BitVector> xs(20, BitVector{1, 0, 0});
  for (int i = 0; i < 19; ++i) xs[i][1] = 1;
  xs[0][2] = 1;
  EXPECT_TRUE(Succeeds(xs, 1));
  EXPECT_TRUE(Succeeds(xs, 2));
  EXPECT_FALSE(Succeeds(xs, 3));
  EXPECT_FALSE(Succeeds(xs, 4));
  EXPECT_THAT(ColumnSums(xs), ::testing::ElementsAre(20, 19, 1));
}

// The aggregate noise of any participant count between the low bound and
// the cap keeps the sensitivity-1 sum (epsilon0, delta0)-private.
TEST(PrivacyTest, AggregateNoiseHockeyStick) {
  ASSERT_OK_AND_ASSIGN(SelectionParams p, selection::Setup(64, 16, 1, 1e-4));
  for (int64_t users : {p.participant_low, p.participant_cap}) {
    ASSERT_OK_AND_ASSIGN(
        dist::DiscretePMF nb,
        dist::PmfOf(dist::DistSpec::NegativeBinomial(p.noise_shape * users,
                                                     p.noise_p),
                    1e-15));
    dist::DiscretePMF noise = dist::Convolve(nb, Negate(nb));
    dist::DiscretePMF shifted = dist::Convolve(noise, dist::PointPmf(1));
    for (auto [a, b] : {std::pair{noise, shifted}, std::pair{shifted, noise}}) {
      const dist::HockeyStickValue hs = dist::HockeyStick(a, b, p.epsilon0);
      EXPECT_LE(hs.value + hs.truncation_error, p.delta0) << users;
    }
  }
}

TEST(ParticipationTest, CountsStayWithinBounds) {
  ASSERT_OK_AND_ASSIGN(SelectionParams p, selection::Setup(64, 16, 1, 1e-4));
  std::vector<BitVector> xs(p.n, BitVector(64, 0));
  for (int s = 0; s < 20; ++s) {
    ASSERT_OK_AND_ASSIGN(TranscriptHistogram h, RunProtocol(xs, p, 200 + s));
    for (int64_t c : Analyze(h, p).participants) {
      EXPECT_GE(c, p.participant_low);
      EXPECT_LE(c, p.participant_cap);
    }
  }
}

// At N = 1.6e5 a Chernoff bound puts each count within 1% of N except with
// probability below 1e-4.
TEST(ParticipationTest, ConcentratesWithinOnePercent) {
  const int64_t D = 4, n = 320000;
  SelectionParams p = Manual(D, 2, 2, 1, 1 << 20);
  const double N = static_cast<double>(n) * p.m / D;
  std::vector<BitVector> xs(n, BitVector(D, 0));
  int outside = 0, total = 0;
  for (int s = 0; s < 2; ++s) {
    ASSERT_OK_AND_ASSIGN(TranscriptHistogram h, RunProtocol(xs, p, 300 + s));
    for (int64_t c : Analyze(h, p).participants) {
      outside += c < 0.99 * N || c > 1.01 * N;
      ++total;
    }
  }
  EXPECT_LE(outside, total / 100);
}

}  // namespace
}  // namespace selection
}  // namespace shuffledp
