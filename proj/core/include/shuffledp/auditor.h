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

#ifndef SHUFFLEDP_AUDITOR_H_
#define SHUFFLEDP_AUDITOR_H_

#include <cstdint>
#include <map>
#include <utility>
#include <vector>

#include "absl/status/statusor.h"
#include "shuffledp/countdistinct.h"
#include "shuffledp/distlib.h"
#include "shuffledp/hardness.h"
#include "shuffledp/randomizer_matrix.h"
#include "shuffledp/rng.h"
#include "shuffledp/shuffle_core.h"

namespace shuffledp {
namespace audit {

// Protocol-level divergences

struct ProtocolAudit {
  // d_{eps/2}(X || Y) and d_{eps/2}(Y || X), where X is the noise seen at one
  // coordinate and Y = X + Ber(1/2).
  dist::HockeyStickValue forward;
  dist::HockeyStickValue backward;
  double bound = 0.0;  // delta / 3
  bool pass = false;
};

// Audits one coordinate of the base protocol with `m_i` other holders of
// the changed element: X = Bin(n, q') + 2 NB(r, p) + Bin(m_i, 1/2).
absl::StatusOr<ProtocolAudit> AuditProtocol1d(
    const countdistinct::ProtocolParams& params, int64_t m_i,
    double trunc_budget = 1e-15);

// Robust variant: only `participants` users run the randomizer, so the
// binomial has that many trials and the NB shape is participants * r/(gamma n).
absl::StatusOr<ProtocolAudit> AuditRobust1d(
    const countdistinct::RobustParams& params, int64_t participants,
    int64_t m_i, double trunc_budget = 1e-15);

// Exact small-instance shuffle divergences

// Distribution of the shuffled transcript, keyed by message counts.
using TranscriptLaw = std::map<std::vector<int>, double>;

// Dataset values are 1-based inputs of the randomizer (value v uses row v-1).
absl::StatusOr<TranscriptLaw> ShuffledTranscriptLaw(
    const MultiMessageRandomizer& randomizer, const Dataset& dataset);

double HockeyStick(const TranscriptLaw& p, const TranscriptLaw& q, double eps);

// d_eps(shuffle(R, d1) || shuffle(R, d2)). Limited to n <= 6 users,
// at most 6 messages and arity <= 2.
absl::StatusOr<double> ExactShuffleDivergence(
    const MultiMessageRandomizer& randomizer, const Dataset& d1,
    const Dataset& d2, double eps);

// Hockey-stick lower bound machinery

// d_eps(Ber(alpha) + Bin(m, beta) || Ber(beta) + Bin(m, beta)).
absl::StatusOr<double> HsExact(int64_t m, double alpha, double beta,
                               double eps);

// (alpha - e^eps beta) d_{ln tau}(1 + N || N) with N = Bin(m, beta).
absl::StatusOr<double> HsShiftForm(int64_t m, double alpha, double beta,
                                   double eps);

// Delta / (2 sqrt(2m)) exp(-c0 m (e^eps / Delta) beta (ln(1/Delta) + 1)),
// Delta = alpha - e^eps beta.
absl::StatusOr<double> HsLowerBound(int64_t m, double alpha, double beta,
                                    double eps, double c0);

struct HsPoint {
  int64_t m = 1;
  double alpha = 0.0;
  double beta = 0.0;
  double eps = 0.0;
};

// Smallest c0 >= 0 for which the lower bound holds at `point`.
absl::StatusOr<double> HsRequiredC0(const HsPoint& point);

struct HsFit {
  double c0 = 0.0;
  // Number of validation points where exact < bound.
  int violations = 0;
  double worst_ratio = 0.0;  // min over validation of exact / bound
};

absl::StatusOr<HsFit> FitAndValidateC0(const std::vector<HsPoint>& train,
                                       const std::vector<HsPoint>& validate);

// Cartesian product of the axes, keeping the points that satisfy
// alpha > e^eps beta and 4 (e^eps / Delta) beta < 1/2.
std::vector<HsPoint> HsGrid(const std::vector<int64_t>& ms,
                            const std::vector<double>& alphas,
                            const std::vector<double>& betas,
                            const std::vector<double>& epss);

// Default fitting and held-out grids over eps in (0, 2]. The held-out axes
// interleave the training axes.
std::vector<HsPoint> HsTrainingGrid();
std::vector<HsPoint> HsValidationGrid();

// Domination

struct DominationCertificate {
  double epsilon_star = 0.0;
  std::vector<double> dominating;
  // max_x sum_z [p_{x,z} - e^{eps*} D_z]_+, recomputed from the certificate.
  double residual_delta = 0.0;
};

absl::StatusOr<DominationCertificate> FindMinDomination(
    const RandomizerMatrix& randomizer, double delta);

// max_x sum_z [p_{x,z} - e^eps D_z]_+.
double DominationResidual(const RandomizerMatrix& randomizer,
                          const std::vector<double>& dominating, double eps);

// d_eps between two probability vectors of equal length.
double HockeyStickRows(const std::vector<double>& p,
                       const std::vector<double>& q, double eps);

// Smallest eps >= 0 with d_eps(R(x) || R(x')) <= delta for every pair.
// Infinity when no finite eps works.
double ExactLdpEpsilon(const RandomizerMatrix& randomizer, double delta);

// Merged randomizers

// `selection` lists k distinct (user, position) pairs, 0-based, with users in
// [0, n) and positions in [0, arity).
absl::StatusOr<MultiMessageRandomizer> MergedRandomizer(
    const MultiMessageRandomizer& randomizer,
    std::vector<std::pair<int, int>> selection);

// R^rand: R^F averaged over all k-subsets F of [n] x [k].
absl::StatusOr<MultiMessageRandomizer> RandomMergedRandomizer(
    const MultiMessageRandomizer& randomizer, int n);

// max over x, y of d_eps(S(x y^{n-1}) || S(y^n)) and the reverse, S being the
// shuffled transcript law.
absl::StatusOr<double> ShuffleDelta(const MultiMessageRandomizer& randomizer,
                                    int n, double eps);

struct PseudoLocalReport {
  bool pass = false;
  double epsilon_used = 0.0;
  // max over x, y of d_{epsilon_used}(R(x) || R^rand(y)).
  double worst = 0.0;
};

// Tests the pseudo-local inequality at (eps + k(1 + ln n), delta).
absl::StatusOr<PseudoLocalReport> PseudoLocalCheck(
    const MultiMessageRandomizer& randomizer, int n, double eps, double delta);

// Dominated KL bound

struct WKind {
  enum class Type { kParseval, kLevel1 };
  Type type = Type::kLevel1;
  double alpha = 0.0;
  int D = 1;

  static WKind Parseval(double alpha, int D) {
    return {Type::kParseval, alpha, D};
  }
  static WKind Level1(int D) { return {Type::kLevel1, 0.0, D}; }
  double operator()(double L) const;
};

struct KlCheck {
  double lhs = 0.0;
  double rhs = 0.0;
  // max over the family of max_x lambda_x / mu_x.
  double domination_ratio = 0.0;
  double epsilon_star = 0.0;
};

absl::StatusOr<KlCheck> DominatedKlCheck(
    const RandomizerMatrix& randomizer,
    const std::vector<std::vector<double>>& family,
    const std::vector<double>& mu, const std::vector<double>& weights,
    double eps, double delta, const WKind& w);

// Families over {0,1}^D (input x is row x): uniform conditioned on x_j = l,
// and the parity mixtures with the s = 0 members equal to uniform.
std::vector<std::vector<double>> Level1Family(int D);
absl::StatusOr<std::vector<std::vector<double>>> ParsevalFamily(int D,
                                                                double alpha);

// Poisson mixtures

struct PoissonTvBound {
  double bound = 0.0;
  double alpha_l1 = 0.0;
  // Pr_{i ~ theta}[lambda_i >= 2 Lambda^2 theta_i].
  double coverage = 0.0;
  bool applicable = false;
};

absl::StatusOr<PoissonTvBound> PoissonTvBoundFor(
    const hardness::MomentPair& pair, const std::vector<double>& theta,
    const std::vector<double>& lambda, int L);

struct PoissonTvEstimate {
  double tv = 0.0;
  double sigma = 0.0;
  int64_t samples = 0;
};

// TV between E[Poi(U theta + lambda)] and E[Poi(V theta + lambda)] estimated
// as E_M |P - Q| / (P + Q) with M = (P + Q) / 2 and exact likelihoods.
absl::StatusOr<PoissonTvEstimate> PoissonTvEmpirical(
    const hardness::MomentPair& pair, const std::vector<double>& theta,
    const std::vector<double>& lambda, int64_t samples, Rng& rng,
    int bootstrap_rounds = 200);

// Ratio check

struct RatioCheck {
  bool pass = false;
  // max over i, j of Pr_{z ~ R(i)}[R(i)_z >= 2 e^eps R(j)_z].
  double worst_probability = 0.0;
};

absl::StatusOr<RatioCheck> LdpRatioCheck(const RandomizerMatrix& randomizer,
                                         double eps, double delta);

}  // namespace audit
}  // namespace shuffledp

#endif  // SHUFFLEDP_AUDITOR_H_
