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

#include "shuffledp/sq_bridge.h"

#include <algorithm>
#include <cmath>

#include "absl/strings/str_cat.h"
#include "shuffledp/numeric.h"
#include "shuffledp/status_macros.h"

namespace shuffledp {
namespace sq {
namespace {

std::vector<double> AcceptanceTable(const RandomizerMatrix& randomizer,
                                    const audit::DominationCertificate& cert,
                                    int z) {
  const double scale = std::exp(cert.epsilon_star) * cert.dominating[z];
  std::vector<double> g(randomizer.num_inputs());
  for (int x = 0; x < randomizer.num_inputs(); ++x) {
    g[x] = std::min(1.0, randomizer(x, z) / scale);
  }
  return g;
}

int SampleIndex(const std::vector<double>& weights, Rng& rng) {
  double u = UniformDouble(rng);
  for (size_t i = 0; i + 1 < weights.size(); ++i) {
    if (u < weights[i]) return static_cast<int>(i);
    u -= weights[i];
  }
  return static_cast<int>(weights.size()) - 1;
}

absl::Status CheckCertificate(const RandomizerMatrix& randomizer,
                              const audit::DominationCertificate& cert,
                              double beta) {
  if (static_cast<int>(cert.dominating.size()) != randomizer.num_messages()) {
    return absl::InvalidArgumentError("certificate has the wrong size");
  }
  if (!(beta > 0.0) || !(beta < 1.0)) {
    return absl::InvalidArgumentError("beta must lie in (0, 1)");
  }
  if (beta < cert.residual_delta - 1e-12) {
    return absl::FailedPreconditionError(absl::StrCat(
        "beta = ", beta, " is below the certificate's delta ",
        cert.residual_delta));
  }
  return absl::OkStatus();
}

}  // namespace

absl::StatusOr<SqOracle> SqOracle::Create(std::vector<double> distribution,
                                          NoiseMode mode, uint64_t seed) {
  if (distribution.empty()) return absl::InvalidArgumentError("empty support");
  CompensatedSum total;
  for (double w : distribution) {
    if (!(w >= 0.0)) return absl::InvalidArgumentError("negative mass");
    total.Add(w);
  }
  if (std::abs(total.value() - 1.0) > 1e-12) {
    return absl::InvalidArgumentError("distribution must sum to 1");
  }
  return SqOracle(std::move(distribution), mode, seed);
}

double SqOracle::Exact(const std::vector<double>& g) const {
  CompensatedSum sum;
  for (size_t x = 0; x < g.size(); ++x) sum.Add(distribution_[x] * g[x]);
  return sum.value();
}

absl::StatusOr<double> SqOracle::Query(const std::vector<double>& g,
                                       double tau, Codomain codomain) {
  if (!(tau > 0.0) || !(tau < 1.0)) {
    return absl::InvalidArgumentError("tau must lie in (0, 1)");
  }
  if (g.size() != distribution_.size()) {
    return absl::InvalidArgumentError("query has the wrong size");
  }
  const double lo = codomain == Codomain::kUnit ? 0.0 : -1.0;
  for (double v : g) {
    if (!(v >= lo && v <= 1.0)) {
      return absl::OutOfRangeError("query value outside its codomain");
    }
  }
  const double exact = Exact(g);
  double shift = 0.0;
  switch (mode_) {
    case NoiseMode::kNone:
      break;
    case NoiseMode::kWorstCase:
      shift = (queries_ % 2 == 0) ? tau : -tau;
      break;
    case NoiseMode::kRandom:
      shift = (2 * UniformDouble(rng_) - 1) * tau;
      break;
  }
  ++queries_;
  const double answer = std::clamp(exact + shift, lo, 1.0);
  if (std::abs(answer - exact) > tau * (1 + 1e-12)) {
    return absl::InternalError("oracle answer outside tolerance");
  }
  return answer;
}

absl::StatusOr<Draw> SimulateDominated(
    const RandomizerMatrix& randomizer,
    const audit::DominationCertificate& cert, double beta, SqOracle& oracle,
    Rng& rng) {
  RETURN_IF_ERROR(CheckCertificate(randomizer, cert, beta));
  const double tau = beta / std::exp(cert.epsilon_star);
  Draw draw;
  for (int64_t round = 0; round < kMaxRejectionRounds; ++round) {
    const int z = SampleIndex(cert.dominating, rng);
    ASSIGN_OR_RETURN(double estimate,
                     oracle.Query(AcceptanceTable(randomizer, cert, z), tau));
    ++draw.queries;
    if (UniformDouble(rng) < std::max(estimate, 0.0)) {
      draw.message = z;
      return draw;
    }
  }
  return absl::InternalError(absl::StrCat(
      "no acceptance in ", kMaxRejectionRounds, " rounds; certificate broken?"));
}

absl::StatusOr<ShuffleDraws> SimulateShuffleBySq(
    const RandomizerMatrix& randomizer,
    const audit::DominationCertificate& cert, int64_t n, double beta,
    SqOracle& oracle, Rng& rng) {
  if (n < 1) return absl::InvalidArgumentError("n must be >= 1");
  const double per_draw = beta / static_cast<double>(n);
  ShuffleDraws out;
  out.messages.reserve(n);
  for (int64_t i = 0; i < n; ++i) {
    ASSIGN_OR_RETURN(Draw draw, SimulateDominated(randomizer, cert, per_draw,
                                                  oracle, rng));
    out.messages.push_back(draw.message);
    out.queries += draw.queries;
  }
  return out;
}

std::vector<double> SimulationLaw(const RandomizerMatrix& randomizer,
                                  const audit::DominationCertificate& cert,
                                  const std::vector<double>& input_dist,
                                  double beta, const std::vector<int>& signs) {
  const int M = randomizer.num_messages();
  const double tau = beta / std::exp(cert.epsilon_star);
  std::vector<double> accept(M);
  CompensatedSum total;
  for (int z = 0; z < M; ++z) {
    const std::vector<double> g = AcceptanceTable(randomizer, cert, z);
    CompensatedSum mean;
    for (size_t x = 0; x < g.size(); ++x) mean.Add(input_dist[x] * g[x]);
    const double answer = std::clamp(mean.value() + signs[z] * tau, 0.0, 1.0);
    accept[z] = cert.dominating[z] * answer;
    total.Add(accept[z]);
  }
  for (double& a : accept) a /= total.value();
  return accept;
}

absl::StatusOr<SimulationCheck> CheckSimulationExactly(
    const RandomizerMatrix& randomizer,
    const audit::DominationCertificate& cert,
    const std::vector<double>& input_dist, double beta) {
  RETURN_IF_ERROR(CheckCertificate(randomizer, cert, beta));
  const int M = randomizer.num_messages();
  if (M > 8) return absl::ResourceExhaustedError("at most 8 messages");
  const double scale = std::exp(cert.epsilon_star);
  const double tau = beta / scale;
  SimulationCheck check;
  for (int z = 0; z < M; ++z) {
    const std::vector<double> g = AcceptanceTable(randomizer, cert, z);
    CompensatedSum mean;
    for (size_t x = 0; x < g.size(); ++x) mean.Add(input_dist[x] * g[x]);
    const double dz = cert.dominating[z];
    check.intervals.emplace_back(
        dz * (mean.value() - tau) * scale / (1 + 3 * beta),
        dz * (mean.value() + tau) * scale / (1 - 3 * beta));
  }
  const std::vector<double> target = randomizer.Push(input_dist);
  std::vector<int> signs(M, -1);
  while (true) {
    const std::vector<double> law =
        SimulationLaw(randomizer, cert, input_dist, beta, signs);
    CompensatedSum tv;
    for (int z = 0; z < M; ++z) {
      const auto [lo, hi] = check.intervals[z];
      check.max_violation =
          std::max({check.max_violation, lo - law[z], law[z] - hi});
      tv.Add(std::abs(law[z] - target[z]));
    }
    check.max_tv = std::max(check.max_tv, tv.value() / 2);
    int i = 0;
    while (i < M && signs[i] == 1) signs[i++] = -1;
    if (i == M) break;
    ++signs[i];
  }
  return check;
}

}  // namespace sq
}  // namespace shuffledp
