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

// Truncated discrete distributions over the integers, their convolutions and
// mixtures, samplers, and the divergences used by the audits.

#ifndef SHUFFLEDP_DISTLIB_H_
#define SHUFFLEDP_DISTLIB_H_

#include <cstdint>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "shuffledp/rng.h"

namespace shuffledp {
namespace dist {

inline constexpr double kDefaultTruncationBudget = 1e-15;

// Largest number of stored outcomes a single PMF may hold.
inline constexpr int64_t kMaxSupportSize = int64_t{1} << 27;

// Probability mass function on consecutive integers starting at `offset`.
// Mass outside the stored range is accounted for by `tail_mass`.
struct DiscretePMF {
  int64_t offset = 0;
  std::vector<double> masses;
  double tail_mass = 0.0;

  int64_t size() const { return static_cast<int64_t>(masses.size()); }
  int64_t min_value() const { return offset; }
  int64_t max_value() const { return offset + size() - 1; }
  // Stored mass at outcome k, zero outside the stored range.
  double at(int64_t k) const;
  double StoredMass() const;
  double Mean() const;
};

// Checks the DiscretePMF invariants. Masses in [-1e-15, 0) are clamped to 0.
absl::Status Validate(DiscretePMF& pmf);

class DistSpec {
 public:
  enum class Kind {
    kBernoulli,
    kBinomial,
    kPoisson,
    kNegativeBinomial,
    kPoint,
    kScaled,
    kConvolution,
    kMixture,
  };

  static DistSpec Bernoulli(double p);
  static DistSpec Binomial(int64_t n, double p);
  static DistSpec Poisson(double lambda);
  // NB(r, p) with pmf C(k+r-1, k) (1-p)^r p^k and mean p r / (1-p).
  static DistSpec NegativeBinomial(double r, double p);
  // NB(r, p) specified through 1 - p, which keeps full precision for p near 1.
  static DistSpec NegativeBinomialFromComplement(double r, double one_minus_p);
  static DistSpec Point(int64_t k);
  // Law of factor * X for X ~ inner.
  static DistSpec Scaled(DistSpec inner, int64_t factor);
  // Law of the sum of independent draws from each part.
  static DistSpec Convolution(std::vector<DistSpec> parts);
  static DistSpec Mixture(std::vector<double> weights,
                          std::vector<DistSpec> parts);

  Kind kind() const { return kind_; }
  int64_t n() const { return n_; }
  // Success probability for Bernoulli/Binomial, p for NB.
  double p() const { return p_; }
  // 1 - p() computed without cancellation where possible.
  double q() const { return q_; }
  double lambda() const { return lambda_; }
  double r() const { return r_; }
  int64_t point() const { return point_; }
  int64_t factor() const { return factor_; }
  const std::vector<DistSpec>& parts() const { return parts_; }
  const std::vector<double>& weights() const { return weights_; }

  absl::Status Validate() const;

 private:
  explicit DistSpec(Kind kind) : kind_(kind) {}

  Kind kind_;
  int64_t n_ = 0;
  double p_ = 0.0;
  double q_ = 1.0;
  double lambda_ = 0.0;
  double r_ = 0.0;
  int64_t point_ = 0;
  int64_t factor_ = 1;
  std::vector<DistSpec> parts_;
  std::vector<double> weights_;
};

// Builds the truncated PMF. Every leaf distribution loses at most
// `trunc_budget` of mass to truncation.
absl::StatusOr<DiscretePMF> PmfOf(const DistSpec& spec,
                                  double trunc_budget = kDefaultTruncationBudget);

DiscretePMF PointPmf(int64_t k);
DiscretePMF Convolve(const DiscretePMF& a, const DiscretePMF& b);
DiscretePMF ScalePmf(const DiscretePMF& a, int64_t factor);
absl::StatusOr<DiscretePMF> MixPmfs(const std::vector<double>& weights,
                                    const std::vector<DiscretePMF>& parts);

struct HockeyStickValue {
  // Sum of [p_x - e^eps q_x]_+ over stored outcomes.
  double value = 0.0;
  // Mass of p outside its stored range; the true divergence is at most
  // value + truncation_error.
  double truncation_error = 0.0;
  double Upper() const { return value + truncation_error; }
};

HockeyStickValue HockeyStick(const DiscretePMF& p, const DiscretePMF& q,
                             double eps);

enum class DivergenceKind { kTV, kKL, kChiSquared };

// TV is half the l1 distance of the stored masses. KL uses natural logs.
// KL and chi-squared return OutOfRange when p puts mass where q has none.
absl::StatusOr<double> Divergence(const DiscretePMF& p, const DiscretePMF& q,
                                  DivergenceKind kind);

int64_t Sample(const DistSpec& spec, Rng& rng);

// Pr[outcome odd] over stored masses.
double ParityMass(const DiscretePMF& pmf);

}  // namespace dist
}  // namespace shuffledp

#endif  // SHUFFLEDP_DISTLIB_H_
