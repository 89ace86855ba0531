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

#include "shuffledp/auditor.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "absl/strings/str_cat.h"
#include "boost/math/special_functions/gamma.hpp"
#include "shuffledp/numeric.h"
#include "shuffledp/status_macros.h"

namespace shuffledp {
namespace audit {
namespace {

constexpr size_t kMaxTranscriptStates = 1 << 20;

absl::StatusOr<ProtocolAudit> AuditNoise(int64_t users, double q_prime,
                                         double shape, double one_minus_p,
                                         double epsilon, double delta,
                                         int64_t m_i, double trunc_budget) {
  if (m_i < 0) return absl::InvalidArgumentError("m_i must be >= 0");
  std::vector<dist::DistSpec> parts = {
      dist::DistSpec::Binomial(users, q_prime),
      dist::DistSpec::Scaled(
          dist::DistSpec::NegativeBinomialFromComplement(shape, one_minus_p),
          2)};
  if (m_i > 0) parts.push_back(dist::DistSpec::Binomial(m_i, 0.5));
  ASSIGN_OR_RETURN(dist::DiscretePMF x,
                   dist::PmfOf(dist::DistSpec::Convolution(std::move(parts)),
                               trunc_budget));
  const dist::DiscretePMF y =
      dist::Convolve(x, *dist::PmfOf(dist::DistSpec::Bernoulli(0.5)));
  ProtocolAudit audit;
  audit.forward = dist::HockeyStick(x, y, epsilon / 2);
  audit.backward = dist::HockeyStick(y, x, epsilon / 2);
  audit.bound = delta / 3;
  audit.pass = audit.forward.Upper() <= audit.bound &&
               audit.backward.Upper() <= audit.bound;
  return audit;
}

double KlRows(const std::vector<double>& p, const std::vector<double>& q) {
  CompensatedSum sum;
  for (size_t z = 0; z < p.size(); ++z) {
    if (p[z] <= 0.0) continue;
    if (q[z] <= 0.0) return std::numeric_limits<double>::infinity();
    sum.Add(p[z] * std::log(p[z] / q[z]));
  }
  return std::max(0.0, sum.value());
}

absl::Status CheckHsArgs(int64_t m, double alpha, double beta, double eps) {
  if (m < 0) return absl::InvalidArgumentError("m must be >= 0");
  if (!(alpha > 0.0 && alpha <= 1.0 && beta > 0.0 && beta <= 1.0)) {
    return absl::InvalidArgumentError("alpha and beta must lie in (0, 1]");
  }
  if (!(eps >= 0.0)) return absl::InvalidArgumentError("eps must be >= 0");
  if (!(alpha > std::exp(eps) * beta)) {
    return absl::FailedPreconditionError("need alpha > e^eps * beta");
  }
  return absl::OkStatus();
}

double LogPoissonKernel(int64_t count, double rate) {
  if (rate <= 0.0) {
    return count == 0 ? 0.0 : -std::numeric_limits<double>::infinity();
  }
  return static_cast<double>(count) * std::log(rate) - rate;
}

}  // namespace

absl::StatusOr<ProtocolAudit> AuditProtocol1d(
    const countdistinct::ProtocolParams& params, int64_t m_i,
    double trunc_budget) {
  return AuditNoise(params.n, params.q_prime, params.r, params.one_minus_p,
                    params.epsilon, params.delta, m_i, trunc_budget);
}

absl::StatusOr<ProtocolAudit> AuditRobust1d(
    const countdistinct::RobustParams& params, int64_t participants,
    int64_t m_i, double trunc_budget) {
  const countdistinct::ProtocolParams& base = params.base;
  if (participants < 1 || participants > base.n) {
    return absl::InvalidArgumentError(
        absl::StrCat("participants = ", participants));
  }
  return AuditNoise(participants, base.q_prime,
                    base.noise_shape * static_cast<double>(participants),
                    base.one_minus_p, base.epsilon, base.delta, m_i,
                    trunc_budget);
}

absl::StatusOr<TranscriptLaw> ShuffledTranscriptLaw(
    const MultiMessageRandomizer& randomizer, const Dataset& dataset) {
  const RandomizerMatrix& matrix = randomizer.matrix;
  const TupleAlphabet& outputs = randomizer.outputs;
  TranscriptLaw law;
  law[std::vector<int>(outputs.base(), 0)] = 1.0;
  for (int64_t v : dataset.entries()) {
    if (v < 1 || v > matrix.num_inputs()) {
      return absl::OutOfRangeError(
          absl::StrCat("dataset value ", v, " has no randomizer row"));
    }
    const std::vector<double>& row = matrix.row(static_cast<int>(v - 1));
    TranscriptLaw next;
    for (const auto& [counts, mass] : law) {
      for (int t = 0; t < outputs.size(); ++t) {
        if (row[t] == 0.0) continue;
        std::vector<int> key = counts;
        for (int message : outputs.tuple(t)) ++key[message];
        next[key] += mass * row[t];
      }
    }
    if (next.size() > kMaxTranscriptStates) {
      return absl::ResourceExhaustedError("transcript state space too large");
    }
    law = std::move(next);
  }
  return law;
}

double HockeyStick(const TranscriptLaw& p, const TranscriptLaw& q,
                   double eps) {
  const double scale = std::exp(eps);
  CompensatedSum sum;
  for (const auto& [key, mass] : p) {
    auto it = q.find(key);
    const double other = it == q.end() ? 0.0 : it->second;
    const double diff = mass - scale * other;
    if (diff > 0.0) sum.Add(diff);
  }
  return sum.value();
}

absl::StatusOr<double> ExactShuffleDivergence(
    const MultiMessageRandomizer& randomizer, const Dataset& d1,
    const Dataset& d2, double eps) {
  if (d1.size() != d2.size()) {
    return absl::InvalidArgumentError("datasets differ in size");
  }
  if (d1.size() > 6 || randomizer.outputs.base() > 6 ||
      randomizer.outputs.arity() > 2) {
    return absl::ResourceExhaustedError(
        "exact enumeration needs n <= 6, <= 6 messages and arity <= 2");
  }
  ASSIGN_OR_RETURN(TranscriptLaw p, ShuffledTranscriptLaw(randomizer, d1));
  ASSIGN_OR_RETURN(TranscriptLaw q, ShuffledTranscriptLaw(randomizer, d2));
  return HockeyStick(p, q, eps);
}

absl::StatusOr<double> HsExact(int64_t m, double alpha, double beta,
                               double eps) {
  RETURN_IF_ERROR(CheckHsArgs(m, alpha, beta, eps));
  ASSIGN_OR_RETURN(dist::DiscretePMF noise,
                   dist::PmfOf(dist::DistSpec::Binomial(m, beta), 1e-300));
  const dist::DiscretePMF p =
      dist::Convolve(noise, *dist::PmfOf(dist::DistSpec::Bernoulli(alpha)));
  const dist::DiscretePMF q =
      dist::Convolve(noise, *dist::PmfOf(dist::DistSpec::Bernoulli(beta)));
  return dist::HockeyStick(p, q, eps).value;
}

absl::StatusOr<double> HsShiftForm(int64_t m, double alpha, double beta,
                                   double eps) {
  RETURN_IF_ERROR(CheckHsArgs(m, alpha, beta, eps));
  const double scale = std::exp(eps);
  const double gap = alpha - scale * beta;
  const double tau = (scale - scale * beta - 1 + alpha) / gap;
  ASSIGN_OR_RETURN(dist::DiscretePMF noise,
                   dist::PmfOf(dist::DistSpec::Binomial(m, beta), 1e-300));
  const dist::DiscretePMF shifted = dist::Convolve(noise, dist::PointPmf(1));
  CompensatedSum sum;
  for (int64_t k = shifted.min_value(); k <= shifted.max_value(); ++k) {
    const double diff = shifted.at(k) - tau * noise.at(k);
    if (diff > 0.0) sum.Add(diff);
  }
  return gap * sum.value();
}

absl::StatusOr<double> HsLowerBound(int64_t m, double alpha, double beta,
                                    double eps, double c0) {
  RETURN_IF_ERROR(CheckHsArgs(m, alpha, beta, eps));
  if (m < 1) return absl::InvalidArgumentError("m must be >= 1");
  const double scale = std::exp(eps);
  const double gap = alpha - scale * beta;
  if (!(4 * scale / gap * beta < 0.5)) {
    return absl::FailedPreconditionError("need 4 (e^eps / Delta) beta < 1/2");
  }
  const double md = static_cast<double>(m);
  const double exponent =
      c0 * md * (scale / gap) * beta * (std::log(1 / gap) + 1);
  return gap / (2 * std::sqrt(2 * md)) * std::exp(-exponent);
}

absl::StatusOr<double> HsRequiredC0(const HsPoint& point) {
  ASSIGN_OR_RETURN(double exact,
                   HsExact(point.m, point.alpha, point.beta, point.eps));
  ASSIGN_OR_RETURN(double base, HsLowerBound(point.m, point.alpha, point.beta,
                                             point.eps, 0.0));
  if (exact >= base) return 0.0;
  const double scale = std::exp(point.eps);
  const double gap = point.alpha - scale * point.beta;
  const double rate = static_cast<double>(point.m) * (scale / gap) *
                      point.beta * (std::log(1 / gap) + 1);
  if (exact <= 0.0) return std::numeric_limits<double>::infinity();
  return std::log(base / exact) / rate;
}

absl::StatusOr<HsFit> FitAndValidateC0(const std::vector<HsPoint>& train,
                                       const std::vector<HsPoint>& validate) {
  HsFit fit;
  for (const HsPoint& point : train) {
    ASSIGN_OR_RETURN(double need, HsRequiredC0(point));
    fit.c0 = std::max(fit.c0, need);
  }
  fit.worst_ratio = std::numeric_limits<double>::infinity();
  for (const HsPoint& point : validate) {
    ASSIGN_OR_RETURN(double exact,
                     HsExact(point.m, point.alpha, point.beta, point.eps));
    ASSIGN_OR_RETURN(double bound, HsLowerBound(point.m, point.alpha,
                                                point.beta, point.eps, fit.c0));
    if (exact < bound) ++fit.violations;
    fit.worst_ratio = std::min(fit.worst_ratio, exact / bound);
  }
  return fit;
}

std::vector<HsPoint> HsGrid(const std::vector<int64_t>& ms,
                            const std::vector<double>& alphas,
                            const std::vector<double>& betas,
                            const std::vector<double>& epss) {
  std::vector<HsPoint> grid;
  for (int64_t m : ms) {
    for (double alpha : alphas) {
      for (double beta : betas) {
        for (double eps : epss) {
          const double gap = alpha - std::exp(eps) * beta;
          if (!(gap > 0.0) || 4 * std::exp(eps) / gap * beta >= 0.5) continue;
          grid.push_back({m, alpha, beta, eps});
        }
      }
    }
  }
  return grid;
}

std::vector<HsPoint> HsTrainingGrid() {
  return HsGrid({1, 2, 4, 8, 16, 32, 64, 128, 256, 512, 1024},
                {0.1, 0.3, 0.5, 0.7, 0.9, 0.99},
                {1e-4, 3e-4, 1e-3, 3e-3, 1e-2, 3e-2, 1e-1},
                {0.1, 0.5, 1.0, 1.5, 2.0});
}

std::vector<HsPoint> HsValidationGrid() {
  return HsGrid({3, 6, 12, 24, 48, 96, 192, 384, 768},
                {0.2, 0.4, 0.6, 0.8, 0.95},
                {2e-4, 6e-4, 2e-3, 6e-3, 2e-2, 6e-2},
                {0.25, 0.75, 1.25, 1.75});
}

double WKind::operator()(double L) const {
  if (type == Type::kParseval) {
    return alpha * alpha * L / std::ldexp(1.0, D);
  }
  return 6 * std::log(L + 1) / D;
}

absl::StatusOr<KlCheck> DominatedKlCheck(
    const RandomizerMatrix& randomizer,
    const std::vector<std::vector<double>>& family,
    const std::vector<double>& mu, const std::vector<double>& weights,
    double eps, double delta, const WKind& w) {
  const int X = randomizer.num_inputs();
  if (static_cast<int>(mu.size()) != X || family.size() != weights.size() ||
      family.empty()) {
    return absl::InvalidArgumentError("family, weights and mu sizes disagree");
  }
  KlCheck check;
  for (const std::vector<double>& lambda : family) {
    if (static_cast<int>(lambda.size()) != X) {
      return absl::InvalidArgumentError("family member has the wrong size");
    }
    for (int x = 0; x < X; ++x) {
      if (lambda[x] <= 0.0) continue;
      const double ratio = mu[x] > 0.0
                               ? lambda[x] / mu[x]
                               : std::numeric_limits<double>::infinity();
      check.domination_ratio = std::max(check.domination_ratio, ratio);
    }
  }
  if (check.domination_ratio > 2 + 1e-12) {
    return absl::FailedPreconditionError(absl::StrCat(
        "mu does not 2-dominate the family (ratio ", check.domination_ratio,
        ")"));
  }
  ASSIGN_OR_RETURN(DominationCertificate cert,
                   FindMinDomination(randomizer, delta));
  check.epsilon_star = cert.epsilon_star;
  if (cert.epsilon_star > eps + 1e-9) {
    return absl::FailedPreconditionError(absl::StrCat(
        "randomizer needs eps ", cert.epsilon_star, " > ", eps));
  }
  const std::vector<double> reference = randomizer.Push(mu);
  CompensatedSum lhs;
  for (size_t v = 0; v < family.size(); ++v) {
    if (weights[v] == 0.0) continue;
    lhs.Add(weights[v] * KlRows(randomizer.Push(family[v]), reference));
  }
  check.lhs = lhs.value();
  constexpr double kTau = 2.0;
  check.rhs = 2 * w(2 * std::exp(eps)) + 4 * (kTau - 1) * (kTau - 1) * delta;
  return check;
}

std::vector<std::vector<double>> Level1Family(int D) {
  const size_t cube = size_t{1} << D;
  std::vector<std::vector<double>> family;
  for (int ell = 0; ell < 2; ++ell) {
    for (int j = 0; j < D; ++j) {
      std::vector<double> member(cube, 0.0);
      for (size_t x = 0; x < cube; ++x) {
        if (static_cast<int>((x >> j) & 1) == ell) {
          member[x] = 2.0 / static_cast<double>(cube);
        }
      }
      family.push_back(std::move(member));
    }
  }
  return family;
}

absl::StatusOr<std::vector<std::vector<double>>> ParsevalFamily(int D,
                                                                double alpha) {
  const uint64_t cube = uint64_t{1} << D;
  std::vector<std::vector<double>> family;
  for (int ell = 0; ell < 2; ++ell) {
    for (uint64_t s = 0; s < cube; ++s) {
      if (s == 0) {
        family.emplace_back(cube, 1.0 / static_cast<double>(cube));
        continue;
      }
      ASSIGN_OR_RETURN(std::vector<double> member,
                       hardness::ParityMixtureDistribution(
                           {D, ell, s, alpha}));
      family.push_back(std::move(member));
    }
  }
  return family;
}

absl::StatusOr<PoissonTvBound> PoissonTvBoundFor(
    const hardness::MomentPair& pair, const std::vector<double>& theta,
    const std::vector<double>& lambda, int L) {
  if (theta.size() != lambda.size() || theta.empty()) {
    return absl::InvalidArgumentError("theta and lambda sizes disagree");
  }
  if (L < 0) return absl::InvalidArgumentError("L must be >= 0");
  CompensatedSum total;
  for (size_t i = 0; i < theta.size(); ++i) {
    if (!(theta[i] >= 0.0) || !(lambda[i] >= 0.0)) {
      return absl::InvalidArgumentError("theta and lambda must be >= 0");
    }
    total.Add(theta[i]);
  }
  if (std::abs(total.value() - 1.0) > 1e-9) {
    return absl::InvalidArgumentError("theta must sum to 1");
  }
  const double Lambda = pair.Lambda;
  PoissonTvBound out;
  CompensatedSum alpha, coverage;
  for (size_t i = 0; i < theta.size(); ++i) {
    if (theta[i] == 0.0) continue;
    alpha.Add(theta[i] * theta[i] / (Lambda * theta[i] + lambda[i]));
    if (lambda[i] >= 2 * Lambda * Lambda * theta[i]) coverage.Add(theta[i]);
  }
  out.alpha_l1 = alpha.value();
  out.coverage = coverage.value();
  out.applicable = out.coverage >= 1 - 1 / (2 * Lambda);
  const double x = Lambda * Lambda * out.alpha_l1;
  // sum_{z > L} x^z / z! = e^x Pr[Poi(x) > L].
  out.bound = std::exp(x) * boost::math::gamma_p(static_cast<double>(L + 1), x);
  return out;
}

absl::StatusOr<PoissonTvEstimate> PoissonTvEmpirical(
    const hardness::MomentPair& pair, const std::vector<double>& theta,
    const std::vector<double>& lambda, int64_t samples, Rng& rng,
    int bootstrap_rounds) {
  if (theta.size() != lambda.size() || theta.empty()) {
    return absl::InvalidArgumentError("theta and lambda sizes disagree");
  }
  if (samples < 2) return absl::InvalidArgumentError("need >= 2 samples");
  std::vector<double> points, log_u, log_v;
  std::vector<double> u_weights, v_weights;
  for (size_t k = 0; k < pair.support.size(); ++k) {
    if (pair.u_masses[k] <= 0.0 && pair.v_masses[k] <= 0.0) continue;
    points.push_back(pair.support[k]);
    u_weights.push_back(std::max(0.0, pair.u_masses[k]));
    v_weights.push_back(std::max(0.0, pair.v_masses[k]));
    log_u.push_back(std::log(u_weights.back()));
    log_v.push_back(std::log(v_weights.back()));
  }
  const size_t K = points.size(), dim = theta.size();
  std::vector<std::vector<double>> rates(K, std::vector<double>(dim));
  for (size_t k = 0; k < K; ++k) {
    for (size_t i = 0; i < dim; ++i) {
      rates[k][i] = points[k] * theta[i] + lambda[i];
    }
  }
  std::discrete_distribution<size_t> pick_u(u_weights.begin(),
                                            u_weights.end());
  std::discrete_distribution<size_t> pick_v(v_weights.begin(),
                                            v_weights.end());
  std::vector<double> values(samples);
  std::vector<int64_t> counts(dim);
  for (int64_t t = 0; t < samples; ++t) {
    const size_t k =
        UniformDouble(rng) < 0.5 ? pick_u(rng) : pick_v(rng);
    for (size_t i = 0; i < dim; ++i) {
      counts[i] = rates[k][i] > 0.0
                      ? std::poisson_distribution<int64_t>(rates[k][i])(rng)
                      : 0;
    }
    double log_p = -std::numeric_limits<double>::infinity();
    double log_q = log_p;
    for (size_t j = 0; j < K; ++j) {
      double ell = 0.0;
      for (size_t i = 0; i < dim; ++i) {
        ell += LogPoissonKernel(counts[i], rates[j][i]);
      }
      log_p = LogAddExp(log_p, log_u[j] + ell);
      log_q = LogAddExp(log_q, log_v[j] + ell);
    }
    if (std::isinf(log_p) || std::isinf(log_q)) {
      values[t] = 1.0;
    } else {
      values[t] = std::abs(std::tanh((log_p - log_q) / 2));
    }
  }
  PoissonTvEstimate out;
  out.samples = samples;
  out.tv = StableSum(values) / static_cast<double>(samples);
  std::vector<double> means(bootstrap_rounds);
  for (int b = 0; b < bootstrap_rounds; ++b) {
    CompensatedSum sum;
    for (int64_t t = 0; t < samples; ++t) {
      sum.Add(values[UniformIndex(rng, samples)]);
    }
    means[b] = sum.value() / static_cast<double>(samples);
  }
  if (bootstrap_rounds > 1) {
    const double mean = StableSum(means) / bootstrap_rounds;
    CompensatedSum var;
    for (double m : means) var.Add((m - mean) * (m - mean));
    out.sigma = std::sqrt(var.value() / (bootstrap_rounds - 1));
  }
  return out;
}

absl::StatusOr<RatioCheck> LdpRatioCheck(const RandomizerMatrix& randomizer,
                                         double eps, double delta) {
  const int X = randomizer.num_inputs();
  for (int i = 0; i < X; ++i) {
    for (int j = 0; j < X; ++j) {
      if (HockeyStickRows(randomizer.row(i), randomizer.row(j), eps) >
          delta + 1e-15) {
        return absl::FailedPreconditionError(
            absl::StrCat("randomizer is not (", eps, ", ", delta, ")-LDP"));
      }
    }
  }
  RatioCheck check;
  const double threshold = 2 * std::exp(eps);
  for (int i = 0; i < X; ++i) {
    for (int j = 0; j < X; ++j) {
      CompensatedSum mass;
      for (int z = 0; z < randomizer.num_messages(); ++z) {
        const double p = randomizer(i, z);
        if (p > 0.0 && p >= threshold * randomizer(j, z)) mass.Add(p);
      }
      check.worst_probability = std::max(check.worst_probability, mass.value());
    }
  }
  check.pass = check.worst_probability <= 2 * delta;
  return check;
}

}  // namespace audit
}  // namespace shuffledp
