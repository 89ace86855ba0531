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

#include "shuffledp/hardness.h"

#include <algorithm>
#include <bit>
#include <cmath>
#include <set>
#include <vector>

#include "boost/math/distributions/chi_squared.hpp"
#include "boost/multiprecision/cpp_dec_float.hpp"
#include "gmock/gmock.h"
#include "gtest/gtest.h"
#include "test_util.h"

namespace shuffledp {
namespace hardness {
namespace {

using ::shuffledp::testing::StatusIs;
using Big = boost::multiprecision::cpp_dec_float_50;

// Largest U0 - V0 over measures on {0} U [1, Lambda] with unit mean and L
// matched moments.
double ClosedFormGap(int L, double Lambda) {
  const double r = std::sqrt(Lambda);
  return (1 + r) * (1 + r) / Lambda * std::pow((r - 1) / (r + 1), L);
}

MomentPair PointPair(double u_point) {
  MomentPair pair;
  pair.support = {u_point};
  pair.u_masses = {1.0};
  pair.v_masses = {1.0};
  pair.L = 1;
  pair.Lambda = std::max(1.0, u_point);
  return pair;
}

TEST(MatchMomentsTest, FirstOrderClosedForm) {
  ASSERT_OK_AND_ASSIGN(MomentPair pair, MatchMoments(1, 10, 0.5));
  EXPECT_GE(pair.gap, 0.9 - 1e-9);
  EXPECT_NEAR(pair.gap, ClosedFormGap(1, 10), 1e-9);
}

TEST(MatchMomentsTest, AgreesWithClosedFormOptimum) {
  for (int L : {2, 4, 6, 8}) {
    for (double c : {10.0, 40.0}) {
      const double Lambda = c * L * L;
      ASSERT_OK_AND_ASSIGN(MomentPair pair, MatchMoments(L, Lambda, 0.5));
      const double bound = ClosedFormGap(L, Lambda);
      // A grid restricts the continuous problem, so it cannot beat it.
      EXPECT_LE(pair.gap, bound + 1e-9) << L << " " << c;
      EXPECT_GE(pair.gap, bound - 1e-3) << L << " " << c;
      EXPECT_GE(pair.gap, 0.0);
    }
  }
}

// Moments recomputed here in 50-digit arithmetic from the stored masses.
TEST(MatchMomentsTest, InvariantsHoldInHighPrecision) {
  for (int L : {1, 3, 8}) {
    const double Lambda = 40.0 * L * L;
    ASSERT_OK_AND_ASSIGN(MomentPair pair, MatchMoments(L, Lambda, 0.5));
    ASSERT_EQ(pair.support.size(), pair.u_masses.size());
    ASSERT_EQ(pair.support.size(), pair.v_masses.size());
    Big mass_u = 0, mass_v = 0, u0 = 0, v0 = 0;
    std::vector<Big> mu(L + 1, Big(0)), mv(L + 1, Big(0));
    for (size_t i = 0; i < pair.support.size(); ++i) {
      const double x = pair.support[i];
      EXPECT_TRUE(x == 0.0 || (x >= 1.0 && x <= Lambda)) << x;
      EXPECT_GE(pair.u_masses[i], 0.0);
      EXPECT_GE(pair.v_masses[i], 0.0);
      const Big bu = pair.u_masses[i], bv = pair.v_masses[i];
      mass_u += bu;
      mass_v += bv;
      if (x == 0.0) {
        u0 += bu;
        v0 += bv;
      }
      Big power = 1;
      for (int j = 1; j <= L; ++j) {
        power *= Big(x);
        mu[j] += bu * power;
        mv[j] += bv * power;
      }
    }
    EXPECT_NEAR(static_cast<double>(mass_u), 1.0, 1e-12);
    EXPECT_NEAR(static_cast<double>(mass_v), 1.0, 1e-12);
    EXPECT_NEAR(static_cast<double>(mu[1]), 1.0, 1e-9);
    EXPECT_NEAR(static_cast<double>(mv[1]), 1.0, 1e-9);
    for (int j = 1; j <= L; ++j) {
      const Big scale = mu[j] > 1 ? mu[j] : Big(1);
      EXPECT_LE(static_cast<double>(abs(mu[j] - mv[j]) / scale), 1e-9)
          << L << " " << j;
    }
    EXPECT_NEAR(static_cast<double>(u0 - v0), pair.gap, 1e-12);
    const MomentReport report = VerifyMoments(pair);
    EXPECT_LE(report.max_relative_mismatch, 1e-9);
    EXPECT_NEAR(report.gap, pair.gap, 1e-12);
  }
}

TEST(MatchMomentsTest, RejectsBadArguments) {
  EXPECT_THAT(MatchMoments(0, 10, 0.5),
              StatusIs(absl::StatusCode::kInvalidArgument));
  EXPECT_THAT(MatchMoments(2, 0.5, 0.5),
              StatusIs(absl::StatusCode::kInvalidArgument));
  EXPECT_THAT(MatchMoments(2, 10, 1.0),
              StatusIs(absl::StatusCode::kInvalidArgument));
  EXPECT_THAT(MatchMoments(2, 10, 0.0),
              StatusIs(absl::StatusCode::kInvalidArgument));
}

TEST(MatchMomentsTest, DegenerateSupportGivesZeroGap) {
  ASSERT_OK_AND_ASSIGN(MomentPair pair, MatchMoments(3, 1.0, 0.5));
  EXPECT_NEAR(pair.gap, 0.0, 1e-12);
}

TEST(MatchMomentsTest, MinimalLambdaConstant) {
  ASSERT_OK_AND_ASSIGN(LambdaSweep sweep,
                       MinimalLambdaConstant(4, 0.5, 0.9, 400.0, 0.5));
  EXPECT_GT(sweep.pair.gap, 0.9);
  EXPECT_NEAR(sweep.pair.Lambda, sweep.c * 16, 1e-9);
  // The continuous optimum first exceeds 0.9 near c = 204.
  EXPECT_GT(ClosedFormGap(4, sweep.c * 16), 0.9);
  EXPECT_NEAR(sweep.c, 204, 3);
  ASSERT_OK_AND_ASSIGN(MomentPair below, MatchMoments(4, (sweep.c - 0.5) * 16,
                                                      0.5));
  EXPECT_LE(below.gap, 0.9);
}

TEST(MatchMomentsTest, JsonRoundTrip) {
  ASSERT_OK_AND_ASSIGN(MomentPair pair, MatchMoments(3, 50, 0.5));
  const std::string json = MomentPairToJson(pair);
  for (const char* key : {"support", "u_masses", "v_masses", "L", "Lambda",
                          "gap"}) {
    EXPECT_NE(json.find(std::string("\"") + key + "\""), std::string::npos);
  }
  ASSERT_OK_AND_ASSIGN(MomentPair back, MomentPairFromJson(json));
  EXPECT_EQ(back.support, pair.support);
  EXPECT_EQ(back.u_masses, pair.u_masses);
  EXPECT_EQ(back.v_masses, pair.v_masses);
  EXPECT_EQ(back.L, pair.L);
  EXPECT_EQ(back.Lambda, pair.Lambda);
  EXPECT_EQ(back.gap, pair.gap);
  EXPECT_FALSE(MomentPairFromJson("{").ok());
  EXPECT_FALSE(MomentPairFromJson(R"({"support": [1]})").ok());
}

TEST(PoissonizedTest, PointMassSizeMean) {
  MomentPair one = PointPair(1.0);
  PoissonizedSpec spec{100, 1000, Side::kU, {1}};
  double total = 0.0;
  const int runs = 400;
  Rng rng(1);
  for (int s = 0; s < runs; ++s) {
    ASSERT_OK_AND_ASSIGN(PoissonizedDataset d,
                         SamplePoissonized(spec, one, rng));
    total += d.dataset.size();
    EXPECT_EQ(d.dataset.universe_size(), 100);
  }
  EXPECT_NEAR(total / runs, 1100, 3 * std::sqrt(1100.0 / runs));
}

TEST(PoissonizedTest, ZeroWeightGivesEmptySignal) {
  MomentPair zero = PointPair(0.0);
  PoissonizedSpec spec{50, 100, Side::kV, {1}};
  Rng rng(2);
  ASSERT_OK_AND_ASSIGN(PoissonizedDataset d, SamplePoissonized(spec, zero, rng));
  EXPECT_EQ(d.signal_size, 0);
  for (int64_t x : d.dataset.entries()) EXPECT_EQ(x, 1);
  spec.E = {};
  EXPECT_FALSE(SamplePoissonized(spec, zero, rng).ok());
}

TEST(PoissonizedTest, SignalDistinctCountMean) {
  ASSERT_OK_AND_ASSIGN(MomentPair pair, MatchMoments(2, 20, 0.5));
  const int64_t D = 200;
  for (Side side : {Side::kU, Side::kV}) {
    const std::vector<double>& w =
        side == Side::kU ? pair.u_masses : pair.v_masses;
    double expected_hit = 0.0;
    for (size_t i = 0; i < w.size(); ++i) {
      expected_hit += w[i] * (1 - std::exp(-pair.support[i]));
    }
    PoissonizedSpec spec{D, 100, side, {1}};
    Rng rng(side == Side::kU ? 3 : 4);
    std::vector<double> counts;
    for (int s = 0; s < 1000; ++s) {
      ASSERT_OK_AND_ASSIGN(PoissonizedDataset d,
                           SamplePoissonized(spec, pair, rng));
      std::set<int64_t> distinct(d.dataset.entries().begin(),
                                 d.dataset.entries().begin() + d.signal_size);
      counts.push_back(static_cast<double>(distinct.size()));
    }
    double mean = 0.0, var = 0.0;
    for (double c : counts) mean += c;
    mean /= counts.size();
    for (double c : counts) var += (c - mean) * (c - mean);
    var /= counts.size() - 1;
    EXPECT_NEAR(mean, expected_hit * D, 3 * std::sqrt(var / counts.size()));
  }
}

TEST(PoissonizedTest, SizeConcentrates) {
  ASSERT_OK_AND_ASSIGN(MomentPair pair, MatchMoments(2, 20, 0.5));
  const int64_t n = 10000, D = 1000;
  std::vector<int64_t> E;
  for (int64_t j = 1; j <= 10; ++j) E.push_back(j);
  PoissonizedSpec spec{D, n, Side::kU, E};
  Rng rng(5);
  int outside = 0;
  const double slack = std::pow(static_cast<double>(n), 0.99);
  for (int s = 0; s < 200; ++s) {
    ASSERT_OK_AND_ASSIGN(PoissonizedDataset d,
                         SamplePoissonized(spec, pair, rng));
    outside += std::abs(static_cast<double>(d.dataset.size() - n - D)) > slack;
  }
  EXPECT_LE(outside, 2);
}

TEST(TrimTest, IdentityAndSize) {
  Dataset d = *Dataset::Create(9, {1, 2, 3, 4, 5});
  Rng rng(6);
  EXPECT_EQ(TrimDataset(d, 5, rng), d);
  EXPECT_EQ(TrimDataset(d, 10, rng), d);
  Dataset t = TrimDataset(d, 3, rng);
  EXPECT_EQ(t.size(), 3);
  EXPECT_TRUE(std::is_sorted(t.entries().begin(), t.entries().end()));
  EXPECT_EQ(TrimDataset(d, 0, rng).size(), 0);
}

TEST(TrimTest, SurvivalIsUniform) {
  std::vector<int64_t> xs(20);
  for (int i = 0; i < 20; ++i) xs[i] = i + 1;
  Dataset d = *Dataset::Create(20, xs);
  Rng rng(7);
  std::vector<int> survived(21, 0);
  const int runs = 20000;
  for (int s = 0; s < runs; ++s) {
    const Dataset kept = TrimDataset(d, 5, rng);
    for (int64_t x : kept.entries()) ++survived[x];
  }
  double stat = 0.0;
  const double e = runs * 5.0 / 20;
  for (int i = 1; i <= 20; ++i) stat += (survived[i] - e) * (survived[i] - e) / e;
  boost::math::chi_squared chi(19);
  EXPECT_GT(boost::math::cdf(boost::math::complement(chi, stat)), 0.01);
}

TEST(GoodSubsetTest, FullUniverseFailsSizeCondition) {
  std::vector<std::vector<double>> rows(10, std::vector<double>(4, 0.25));
  ASSERT_OK_AND_ASSIGN(RandomizerMatrix R, RandomizerMatrix::Create(rows));
  std::vector<int64_t> all = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  GoodSubsetVerdict v = VerifyGoodSubset(all, R, 2, 1000, 0.01);
  EXPECT_FALSE(v.good);
  EXPECT_FALSE(v.reason.empty());
  GoodSubsetVerdict empty = VerifyGoodSubset({}, R, 2, 1000, 0.01);
  EXPECT_FALSE(empty.good);
  EXPECT_FALSE(empty.reason.empty());
}

// With uniform rows nu_z / mu_z = n / D everywhere, so E is good exactly
// when n / D >= 2 Lambda^2.
TEST(GoodSubsetTest, UniformRandomizerClosedForm) {
  const int64_t D = 200;
  std::vector<std::vector<double>> rows(D, std::vector<double>(5, 0.2));
  ASSERT_OK_AND_ASSIGN(RandomizerMatrix R, RandomizerMatrix::Create(rows));
  std::vector<int64_t> E = {3, 50, 120};
  const double Lambda = 3;
  for (int64_t n : {3000, 3599, 3600, 3601, 10000}) {
    GoodSubsetVerdict v = VerifyGoodSubset(E, R, Lambda, n, 0.01);
    EXPECT_EQ(v.good, static_cast<double>(n) / D >= 2 * Lambda * Lambda) << n;
    EXPECT_EQ(v.worst_probability, v.good ? 1.0 : 0.0) << n;
  }
}

TEST(GoodSubsetTest, SampledSizeCondition) {
  Rng rng(8);
  int ok = 0;
  for (int s = 0; s < 1000; ++s) {
    ASSERT_OK_AND_ASSIGN(std::vector<int64_t> E, SampleGoodSubset(200, 0.01, rng));
    EXPECT_TRUE(std::is_sorted(E.begin(), E.end()));
    ok += !E.empty() && E.size() < 0.04 * 200;
  }
  // Bin(200, 0.01) is 0 with probability 0.134, so the size condition holds
  // in about 86% of draws.
  EXPECT_NEAR(ok / 1000.0, 1 - std::pow(0.99, 200) - 0.0001, 0.04);
  EXPECT_FALSE(SampleGoodSubset(200, 0.5, rng).ok());
  EXPECT_FALSE(SampleGoodSubset(200, 0.0, rng).ok());
}

TEST(ParityTest, ExpectedDistinct) {
  EXPECT_NEAR(ExpectedDistinct(0, 1000), (1 - std::exp(-1.0)) * 1000, 1e-9);
  EXPECT_NEAR(ExpectedDistinct(0.1, 10000), 6302.8, 0.05);
}

TEST(ParityTest, Validation) {
  EXPECT_FALSE(ValidateParityMixture({4, 0, 0, 0.5}).ok());
  EXPECT_FALSE(ValidateParityMixture({4, 2, 1, 0.5}).ok());
  EXPECT_FALSE(ValidateParityMixture({4, 0, 16, 0.5}).ok());
  EXPECT_FALSE(ValidateParityMixture({4, 0, 1, 1.5}).ok());
  EXPECT_TRUE(ValidateParityMixture({4, 1, 5, 0.5}).ok());
  Rng rng(9);
  EXPECT_FALSE(SampleParityMixture({4, 0, 0, 0.5}, 10, rng).ok());
}

TEST(ParityTest, SamplesMatchDistribution) {
  const ParityMixtureSpec spec{4, 1, 0b0110, 0.7};
  ASSERT_OK_AND_ASSIGN(std::vector<double> table,
                       ParityMixtureDistribution(spec));
  double total = 0.0;
  for (uint64_t x = 0; x < 16; ++x) {
    const bool match = (std::popcount(x & spec.s) & 1) == spec.ell;
    EXPECT_NEAR(table[x], 0.3 / 16 + (match ? 0.7 / 8 : 0.0), 1e-15);
    total += table[x];
  }
  EXPECT_NEAR(total, 1.0, 1e-15);
  Rng rng(10);
  const int64_t n = 80000;
  ASSERT_OK_AND_ASSIGN(Dataset d, SampleParityMixture(spec, n, rng));
  EXPECT_EQ(d.universe_size(), 16);
  std::vector<int> counts(16, 0);
  for (int64_t x : d.entries()) ++counts[x - 1];
  double stat = 0.0;
  for (int x = 0; x < 16; ++x) {
    const double e = table[x] * n;
    stat += (counts[x] - e) * (counts[x] - e) / e;
  }
  boost::math::chi_squared chi(15);
  EXPECT_GT(boost::math::cdf(boost::math::complement(chi, stat)), 0.01);
}

TEST(ParityTest, DistinctCountConcentrates) {
  const int D = 14;
  const int64_t n = int64_t{1} << D;
  Rng rng(11);
  int outside = 0;
  for (int s = 0; s < 100; ++s) {
    ASSERT_OK_AND_ASSIGN(Dataset d,
                         SampleParityMixture({D, 0, 0x2A5, 0.1}, n, rng));
    outside += std::abs(d.DistinctNonzero() - ExpectedDistinct(0.1, n)) >
               10 * std::sqrt(static_cast<double>(n));
  }
  EXPECT_LE(outside, 1);
}

TEST(FourierTest, Constant) {
  std::vector<double> one(32, 1.0);
  ASSERT_OK_AND_ASSIGN(std::vector<double> coef, FourierTransform(one));
  EXPECT_DOUBLE_EQ(coef[0], 1.0);
  for (size_t s = 1; s < coef.size(); ++s) EXPECT_DOUBLE_EQ(coef[s], 0.0);
  ASSERT_OK_AND_ASSIGN(double w, Level1Weight(one));
  EXPECT_EQ(w, 0.0);
}

TEST(FourierTest, Dictator) {
  std::vector<double> f(16);
  for (int x = 0; x < 16; ++x) f[x] = (x & 1) == 0 ? 2.0 : 0.0;
  ASSERT_OK_AND_ASSIGN(double w, Level1Weight(f));
  EXPECT_NEAR(w, 1.0, 1e-15);
  EXPECT_LE(w, 6 * std::log(3.0));
  ASSERT_OK_AND_ASSIGN(double c, FourierCoefficient(f, 1));
  EXPECT_NEAR(c, 1.0, 1e-15);
}

TEST(FourierTest, RejectsBadSizes) {
  EXPECT_FALSE(FourierTransform(std::vector<double>(12, 0.0)).ok());
  EXPECT_FALSE(FourierCoefficient(std::vector<double>(8, 0.0), 8).ok());
}

TEST(FourierTest, ParsevalAndDirectCoefficients) {
  Rng rng(12);
  for (int D : {1, 3, 6, 10}) {
    const size_t size = size_t{1} << D;
    std::vector<double> f(size);
    for (double& v : f) v = 2 * UniformDouble(rng) - 1;
    ASSERT_OK_AND_ASSIGN(std::vector<double> coef, FourierTransform(f));
    double energy = 0.0, norm = 0.0;
    for (double c : coef) energy += c * c;
    for (double v : f) norm += v * v / size;
    EXPECT_NEAR(energy, norm, 1e-10);
    for (uint64_t s = 0; s < size; s += 1 + size / 16) {
      double direct = 0.0;
      for (uint64_t x = 0; x < size; ++x) {
        direct += f[x] * ((std::popcount(x & s) & 1) ? -1.0 : 1.0);
      }
      EXPECT_NEAR(coef[s], direct / size, 1e-12);
      ASSERT_OK_AND_ASSIGN(double single, FourierCoefficient(f, s));
      EXPECT_NEAR(single, coef[s], 1e-12);
    }
  }
}

// f-hat(s) is half the difference of E f under the two parity classes of s.
TEST(FourierTest, CoefficientIsParityContrast) {
  Rng rng(13);
  for (int D = 1; D <= 10; D += 3) {
    const uint64_t size = uint64_t{1} << D;
    std::vector<double> f(size);
    for (double& v : f) v = UniformDouble(rng);
    for (uint64_t s = 1; s < size; ++s) {
      ASSERT_OK_AND_ASSIGN(std::vector<double> d0,
                           ParityMixtureDistribution({D, 0, s, 1.0}));
      ASSERT_OK_AND_ASSIGN(std::vector<double> d1,
                           ParityMixtureDistribution({D, 1, s, 1.0}));
      ASSERT_OK_AND_ASSIGN(double c, FourierCoefficient(f, s));
      EXPECT_NEAR(c, 0.5 * (Expectation(f, d0) - Expectation(f, d1)), 1e-12);
    }
  }
}

TEST(FourierTest, Level1Inequality) {
  Rng rng(14);
  for (int trial = 0; trial < 1000; ++trial) {
    const int D = 2 + trial % 7;
    const double L = std::vector<double>{1, 2, 5, 20, 100}[trial % 5];
    const size_t size = size_t{1} << D;
    std::vector<double> f(size);
    double mean = 0.0;
    const int sparsity = 1 + trial % 4;
    for (double& v : f) {
      v = UniformDouble(rng) < 1.0 / sparsity ? L * UniformDouble(rng) : 0.0;
      mean += v / size;
    }
    if (mean > 1.0) {
      for (double& v : f) v /= mean;
    }
    ASSERT_OK_AND_ASSIGN(double w, Level1Weight(f));
    EXPECT_LE(w, 6 * std::log(L + 1)) << trial;
  }
}

}  // namespace
}  // namespace hardness
}  // namespace shuffledp
