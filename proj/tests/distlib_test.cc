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

#include "shuffledp/distlib.h"

#include <cmath>
#include <random>
#include <vector>

#include "gmock/gmock.h"
#include "gtest/gtest.h"
#include "test_util.h"

namespace shuffledp {
namespace dist {
namespace {

using ::shuffledp::testing::IsOk;
using ::shuffledp::testing::StatusIs;
using ::testing::DoubleNear;
using ::testing::ElementsAre;

long double LogChoose(long double n, long double k) {
  return std::lgamma(n + 1) - std::lgamma(k + 1) - std::lgamma(n - k + 1);
}

// Independent closed-form masses.
double BinomialMass(int64_t n, double p, int64_t k) {
  return static_cast<double>(std::exp(LogChoose(n, k) + k * std::log(1.0L * p) +
                                      (n - k) * std::log1p(-1.0L * p)));
}

double PoissonMass(double lambda, int64_t k) {
  return static_cast<double>(
      std::exp(k * std::log(1.0L * lambda) - lambda - std::lgamma(k + 1.0L)));
}

double NegBinMass(double r, double p, int64_t k) {
  const long double log_c = std::lgamma(k + r * 1.0L) - std::lgamma(k + 1.0L) -
                            std::lgamma(r * 1.0L);
  return static_cast<double>(std::exp(log_c + r * std::log1p(-1.0L * p) +
                                      k * std::log(1.0L * p)));
}

double TvOnStored(const DiscretePMF& a, const DiscretePMF& b) {
  const int64_t lo = std::min(a.min_value(), b.min_value());
  const int64_t hi = std::max(a.max_value(), b.max_value());
  double total = 0.0;
  for (int64_t k = lo; k <= hi; ++k) total += std::abs(a.at(k) - b.at(k));
  return total / 2;
}

DiscretePMF RandomPmf(int size, std::mt19937_64& rng, bool full_support) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  DiscretePMF pmf;
  double total = 0.0;
  for (int i = 0; i < size; ++i) {
    double w = u(rng);
    if (!full_support && u(rng) < 0.3) w = 0.0;
    pmf.masses.push_back(w);
    total += w;
  }
  if (total == 0.0) {
    pmf.masses[0] = 1.0;
    total = 1.0;
  }
  for (double& m : pmf.masses) m /= total;
  return pmf;
}

TEST(PmfOfTest, PointMass) {
  ASSERT_OK_AND_ASSIGN(DiscretePMF pmf, PmfOf(DistSpec::Point(3)));
  EXPECT_EQ(pmf.offset, 3);
  EXPECT_THAT(pmf.masses, ElementsAre(1.0));
  EXPECT_EQ(pmf.tail_mass, 0.0);
}

TEST(PmfOfTest, Bernoulli) {
  ASSERT_OK_AND_ASSIGN(DiscretePMF pmf, PmfOf(DistSpec::Bernoulli(0.25)));
  EXPECT_EQ(pmf.offset, 0);
  EXPECT_THAT(pmf.masses, ElementsAre(DoubleNear(0.75, 1e-16),
                                      DoubleNear(0.25, 1e-16)));
}

TEST(PmfOfTest, PoissonMeanAndMasses) {
  ASSERT_OK_AND_ASSIGN(DiscretePMF pmf, PmfOf(DistSpec::Poisson(3.0), 1e-15));
  EXPECT_NEAR(pmf.Mean(), 3.0, 1e-12);
  EXPECT_LE(pmf.tail_mass, 1e-15);
  for (int64_t k = pmf.min_value(); k <= pmf.max_value(); ++k) {
    EXPECT_NEAR(pmf.at(k), PoissonMass(3.0, k), 1e-15) << k;
  }
}

TEST(PmfOfTest, BinomialMatchesClosedForm) {
  for (const auto& [n, p] : std::vector<std::pair<int64_t, double>>{
           {1, 0.3}, {10, 0.5}, {1000, 0.01}, {100000, 2e-5}}) {
    ASSERT_OK_AND_ASSIGN(DiscretePMF pmf, PmfOf(DistSpec::Binomial(n, p)));
    EXPECT_NEAR(pmf.StoredMass() + pmf.tail_mass, 1.0, 1e-12);
    for (int64_t k = pmf.min_value(); k <= pmf.max_value(); ++k) {
      const double expect = BinomialMass(n, p, k);
      EXPECT_NEAR(pmf.at(k), expect, 1e-13 * std::max(1.0, expect))
          << n << " " << p << " " << k;
    }
  }
}

TEST(PmfOfTest, NegativeBinomialMatchesClosedForm) {
  ASSERT_OK_AND_ASSIGN(DiscretePMF pmf,
                       PmfOf(DistSpec::NegativeBinomial(2.5, 0.7)));
  EXPECT_NEAR(pmf.Mean(), 2.5 * 0.7 / 0.3, 1e-12);
  for (int64_t k = pmf.min_value(); k <= pmf.max_value(); ++k) {
    EXPECT_NEAR(pmf.at(k), NegBinMass(2.5, 0.7, k), 1e-14) << k;
  }
}

TEST(PmfOfTest, NegativeBinomialNearOneKeepsMean) {
  const double one_minus_p = 1e-4;
  ASSERT_OK_AND_ASSIGN(
      DiscretePMF pmf,
      PmfOf(DistSpec::NegativeBinomialFromComplement(50.0, one_minus_p)));
  const double mean = 50.0 * (1 - one_minus_p) / one_minus_p;
  EXPECT_NEAR(pmf.Mean() / mean, 1.0, 1e-10);
  EXPECT_NEAR(pmf.StoredMass() + pmf.tail_mass, 1.0, 1e-12);
  EXPECT_LE(pmf.tail_mass, 1e-15);
}

TEST(PmfOfTest, RejectsInvalidParameters) {
  EXPECT_THAT(PmfOf(DistSpec::Bernoulli(1.5)),
              StatusIs(absl::StatusCode::kInvalidArgument));
  EXPECT_THAT(PmfOf(DistSpec::Poisson(-1.0)),
              StatusIs(absl::StatusCode::kInvalidArgument));
  EXPECT_THAT(PmfOf(DistSpec::NegativeBinomial(0.0, 0.5)),
              StatusIs(absl::StatusCode::kInvalidArgument));
  EXPECT_THAT(PmfOf(DistSpec::Mixture({0.5, 0.6}, {DistSpec::Point(0),
                                                   DistSpec::Point(1)})),
              StatusIs(absl::StatusCode::kInvalidArgument));
  EXPECT_THAT(PmfOf(DistSpec::Poisson(1.0), 1e-3),
              StatusIs(absl::StatusCode::kInvalidArgument));
}

TEST(PmfOfTest, ScaledAndMixture) {
  ASSERT_OK_AND_ASSIGN(
      DiscretePMF pmf,
      PmfOf(DistSpec::Scaled(DistSpec::Bernoulli(0.5), -3)));
  EXPECT_EQ(pmf.min_value(), -3);
  EXPECT_NEAR(pmf.at(-3), 0.5, 1e-16);
  EXPECT_NEAR(pmf.at(0), 0.5, 1e-16);
  EXPECT_EQ(pmf.at(-1), 0.0);
  ASSERT_OK_AND_ASSIGN(
      DiscretePMF mix,
      PmfOf(DistSpec::Mixture({0.25, 0.75},
                              {DistSpec::Point(1), DistSpec::Point(4)})));
  EXPECT_NEAR(mix.at(1), 0.25, 1e-16);
  EXPECT_NEAR(mix.at(4), 0.75, 1e-16);
  EXPECT_NEAR(mix.Mean(), 3.25, 1e-15);
}

TEST(ConvolveTest, PoissonAdditivity) {
  ASSERT_OK_AND_ASSIGN(DiscretePMF a, PmfOf(DistSpec::Poisson(1.0)));
  ASSERT_OK_AND_ASSIGN(DiscretePMF b, PmfOf(DistSpec::Poisson(2.0)));
  ASSERT_OK_AND_ASSIGN(DiscretePMF c, PmfOf(DistSpec::Poisson(3.0)));
  EXPECT_LE(TvOnStored(Convolve(a, b), c), 1e-12);
}

TEST(ConvolveTest, NegativeBinomialAdditivity) {
  ASSERT_OK_AND_ASSIGN(DiscretePMF a, PmfOf(DistSpec::NegativeBinomial(2, 0.5)));
  ASSERT_OK_AND_ASSIGN(DiscretePMF b, PmfOf(DistSpec::NegativeBinomial(3, 0.5)));
  ASSERT_OK_AND_ASSIGN(DiscretePMF c, PmfOf(DistSpec::NegativeBinomial(5, 0.5)));
  EXPECT_LE(TvOnStored(Convolve(a, b), c), 1e-12);
}

TEST(ConvolveTest, PointZeroIsIdentity) {
  ASSERT_OK_AND_ASSIGN(DiscretePMF a, PmfOf(DistSpec::Binomial(7, 0.3)));
  const DiscretePMF c = Convolve(a, PointPmf(0));
  EXPECT_EQ(c.offset, a.offset);
  EXPECT_EQ(c.masses, a.masses);
  EXPECT_EQ(c.tail_mass, a.tail_mass);
}

TEST(ConvolveTest, TailMassesAdd) {
  DiscretePMF a = PointPmf(0), b = PointPmf(1);
  a.masses[0] = 1 - 1e-15;
  a.tail_mass = 1e-15;
  b.masses[0] = 1 - 2e-15;
  b.tail_mass = 2e-15;
  EXPECT_DOUBLE_EQ(Convolve(a, b).tail_mass, 3e-15);
}

TEST(HockeyStickTest, Examples) {
  ASSERT_OK_AND_ASSIGN(DiscretePMF half, PmfOf(DistSpec::Bernoulli(0.5)));
  ASSERT_OK_AND_ASSIGN(DiscretePMF quarter, PmfOf(DistSpec::Bernoulli(0.25)));
  EXPECT_EQ(HockeyStick(half, half, 0.3).value, 0.0);
  EXPECT_NEAR(HockeyStick(half, quarter, 0.0).value, 0.25, 1e-16);
  EXPECT_EQ(HockeyStick(PointPmf(1), PointPmf(0), 5.0).value, 1.0);
}

TEST(HockeyStickTest, MonotoneInEpsilonAndZeroBeyondMaxRatio) {
  std::mt19937_64 rng(11);
  for (int t = 0; t < 100; ++t) {
    const DiscretePMF p = RandomPmf(6, rng, true);
    const DiscretePMF q = RandomPmf(6, rng, true);
    double prev = HockeyStick(p, q, -1.0).value;
    for (double eps = -0.9; eps <= 3.0; eps += 0.1) {
      const double cur = HockeyStick(p, q, eps).value;
      EXPECT_LE(cur, prev + 1e-15);
      prev = cur;
    }
    double max_ratio = 0.0;
    for (int k = 0; k < 6; ++k) {
      max_ratio = std::max(max_ratio, p.masses[k] / q.masses[k]);
    }
    EXPECT_EQ(HockeyStick(p, q, std::log(max_ratio) + 1e-12).value, 0.0);
  }
}

TEST(HockeyStickTest, ZeroEpsilonEqualsTv) {
  std::mt19937_64 rng(12);
  for (int t = 0; t < 100; ++t) {
    const DiscretePMF p = RandomPmf(5, rng, false);
    const DiscretePMF q = RandomPmf(5, rng, false);
    ASSERT_OK_AND_ASSIGN(double tv, Divergence(p, q, DivergenceKind::kTV));
    EXPECT_NEAR(HockeyStick(p, q, 0.0).value, tv, 1e-15);
  }
}

TEST(HockeyStickTest, PostProcessingNeverIncreases) {
  std::mt19937_64 rng(13);
  for (int t = 0; t < 100; ++t) {
    const DiscretePMF p = RandomPmf(8, rng, false);
    const DiscretePMF q = RandomPmf(8, rng, false);
    // Coarsen outcome k to k / 3.
    DiscretePMF fp, fq;
    fp.masses.assign(3, 0.0);
    fq.masses.assign(3, 0.0);
    for (int k = 0; k < 8; ++k) {
      fp.masses[k / 3] += p.masses[k];
      fq.masses[k / 3] += q.masses[k];
    }
    for (double eps : {0.0, 0.2, 1.0}) {
      EXPECT_LE(HockeyStick(fp, fq, eps).value,
                HockeyStick(p, q, eps).value + 1e-15);
    }
  }
}

TEST(HockeyStickTest, MixtureDecomposition) {
  std::mt19937_64 rng(14);
  std::uniform_real_distribution<double> u(0.05, 1.0);
  for (int t = 0; t < 100; ++t) {
    const int parts = 3;
    std::vector<DiscretePMF> a, b;
    std::vector<double> alpha, beta;
    double sa = 0.0, sb = 0.0;
    for (int i = 0; i < parts; ++i) {
      a.push_back(RandomPmf(5, rng, true));
      b.push_back(RandomPmf(5, rng, true));
      alpha.push_back(u(rng));
      beta.push_back(u(rng));
      sa += alpha.back();
      sb += beta.back();
    }
    for (int i = 0; i < parts; ++i) {
      alpha[i] /= sa;
      beta[i] /= sb;
    }
    ASSERT_OK_AND_ASSIGN(DiscretePMF pa, MixPmfs(alpha, a));
    ASSERT_OK_AND_ASSIGN(DiscretePMF pb, MixPmfs(beta, b));
    const double eps = 0.5;
    double rhs = 0.0;
    for (int i = 0; i < parts; ++i) {
      rhs += alpha[i] *
             HockeyStick(a[i], b[i], eps + std::log(beta[i] / alpha[i])).value;
    }
    EXPECT_LE(HockeyStick(pa, pb, eps).value, rhs + 1e-14);
  }
}

TEST(HockeyStickTest, ReportsTailAsTruncationError) {
  DiscretePMF p = PointPmf(0);
  p.masses[0] = 1 - 1e-15;
  p.tail_mass = 1e-15;
  const HockeyStickValue v = HockeyStick(p, PointPmf(0), 0.0);
  EXPECT_EQ(v.truncation_error, 1e-15);
  EXPECT_EQ(v.Upper(), v.value + 1e-15);
}

TEST(DivergenceTest, Examples) {
  ASSERT_OK_AND_ASSIGN(DiscretePMF half, PmfOf(DistSpec::Bernoulli(0.5)));
  ASSERT_OK_AND_ASSIGN(DiscretePMF quarter, PmfOf(DistSpec::Bernoulli(0.25)));
  EXPECT_THAT(Divergence(half, half, DivergenceKind::kTV), IsOk());
  EXPECT_EQ(*Divergence(half, half, DivergenceKind::kTV), 0.0);
  EXPECT_NEAR(*Divergence(half, quarter, DivergenceKind::kTV), 0.25, 1e-16);
  const double kl = 0.5 * std::log(0.5 / 0.75) + 0.5 * std::log(0.5 / 0.25);
  EXPECT_NEAR(*Divergence(half, quarter, DivergenceKind::kKL), kl, 1e-15);
  const double chi2 = 0.25 * 0.25 / 0.75 + 0.25 * 0.25 / 0.25;
  EXPECT_NEAR(*Divergence(half, quarter, DivergenceKind::kChiSquared), chi2,
              1e-15);
}

TEST(DivergenceTest, SupportViolation) {
  EXPECT_THAT(Divergence(PointPmf(1), PointPmf(0), DivergenceKind::kKL),
              StatusIs(absl::StatusCode::kOutOfRange));
  EXPECT_THAT(Divergence(PointPmf(1), PointPmf(0), DivergenceKind::kChiSquared),
              StatusIs(absl::StatusCode::kOutOfRange));
}

TEST(DivergenceTest, KlBelowChiSquaredAndPinsker) {
  std::mt19937_64 rng(15);
  for (int t = 0; t < 200; ++t) {
    const DiscretePMF p = RandomPmf(6, rng, false);
    const DiscretePMF q = RandomPmf(6, rng, true);
    ASSERT_OK_AND_ASSIGN(double tv, Divergence(p, q, DivergenceKind::kTV));
    ASSERT_OK_AND_ASSIGN(double kl, Divergence(p, q, DivergenceKind::kKL));
    ASSERT_OK_AND_ASSIGN(double chi2,
                         Divergence(p, q, DivergenceKind::kChiSquared));
    EXPECT_LE(kl, chi2 + 1e-15);
    EXPECT_LE(tv * tv, kl / 2 + 1e-15);
  }
}

TEST(SampleTest, PointIsConstant) {
  Rng rng(1);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(Sample(DistSpec::Point(7), rng), 7);
}

TEST(SampleTest, BernoulliMean) {
  Rng rng(2);
  double sum = 0.0;
  const int draws = 1000000;
  for (int i = 0; i < draws; ++i) sum += Sample(DistSpec::Bernoulli(0.5), rng);
  EXPECT_NEAR(sum / draws, 0.5, 0.002);
}

TEST(SampleTest, NegativeBinomialMean) {
  Rng rng(3);
  double sum = 0.0;
  const int draws = 1000000;
  for (int i = 0; i < draws; ++i) {
    sum += Sample(DistSpec::NegativeBinomial(2, 0.5), rng);
  }
  EXPECT_NEAR(sum / draws, 2.0, 0.01);
}

TEST(SampleTest, DeterministicGivenSeed) {
  const DistSpec spec = DistSpec::Convolution(
      {DistSpec::Binomial(20, 0.3), DistSpec::Poisson(4.0)});
  Rng a(99), b(99);
  for (int i = 0; i < 50; ++i) EXPECT_EQ(Sample(spec, a), Sample(spec, b));
}

TEST(ParityMassTest, Examples) {
  EXPECT_EQ(ParityMass(PointPmf(2)), 0.0);
  ASSERT_OK_AND_ASSIGN(DiscretePMF ber, PmfOf(DistSpec::Bernoulli(0.3)));
  EXPECT_NEAR(ParityMass(ber), 0.3, 1e-16);
}

TEST(ParityMassTest, BinomialIdentity) {
  for (int64_t n : {1, 7, 50}) {
    for (double q : {0.01, 0.2, 0.45}) {
      ASSERT_OK_AND_ASSIGN(DiscretePMF pmf, PmfOf(DistSpec::Binomial(n, q)));
      EXPECT_NEAR(ParityMass(pmf), (1 - std::pow(1 - 2 * q, n)) / 2, 1e-14);
    }
  }
}

TEST(ValidateTest, ClampsTinyNegativesAndRejectsLarge) {
  DiscretePMF pmf;
  pmf.masses = {0.5, 0.5, -1e-16};
  EXPECT_THAT(Validate(pmf), IsOk());
  EXPECT_EQ(pmf.masses[2], 0.0);
  pmf.masses = {0.6, 0.5, -0.1};
  EXPECT_THAT(Validate(pmf), StatusIs(absl::StatusCode::kInvalidArgument));
  pmf.masses = {0.5, 0.4};
  EXPECT_THAT(Validate(pmf), StatusIs(absl::StatusCode::kInvalidArgument));
}

}  // namespace
}  // namespace dist
}  // namespace shuffledp
