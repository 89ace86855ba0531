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

#include "experiments.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <utility>

#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "shuffledp/auditor.h"
#include "shuffledp/distlib.h"
#include "shuffledp/hardness.h"
#include "shuffledp/rng.h"
#include "shuffledp/selection.h"
#include "shuffledp/shuffle_core.h"
#include "shuffledp/status_macros.h"

namespace shuffledp {
namespace experiments {
namespace {

struct MeanSd {
  double mean = 0.0;
  double sd = 0.0;
};

MeanSd Moments(const std::vector<double>& xs) {
  MeanSd m;
  if (xs.empty()) return m;
  m.mean = std::accumulate(xs.begin(), xs.end(), 0.0) / xs.size();
  double ss = 0.0;
  for (double x : xs) ss += (x - m.mean) * (x - m.mean);
  if (xs.size() > 1) m.sd = std::sqrt(ss / (xs.size() - 1));
  return m;
}

double Quantile(std::vector<double> xs, double q) {
  if (xs.empty()) return 0.0;
  std::sort(xs.begin(), xs.end());
  const double pos = q * (xs.size() - 1);
  const size_t lo = static_cast<size_t>(std::floor(pos));
  const size_t hi = std::min(lo + 1, xs.size() - 1);
  return xs[lo] + (pos - lo) * (xs[hi] - xs[lo]);
}

Json Quantiles(const std::vector<double>& xs) {
  Json j;
  j["min"] = Quantile(xs, 0.0);
  j["p25"] = Quantile(xs, 0.25);
  j["median"] = Quantile(xs, 0.5);
  j["p75"] = Quantile(xs, 0.75);
  j["p95"] = Quantile(xs, 0.95);
  j["max"] = Quantile(xs, 1.0);
  return j;
}

const char* Verdict(bool pass) { return pass ? "pass" : "fail"; }

// Inputs for the distinct-count experiments.
absl::StatusOr<Dataset> SyntheticInputs(int64_t n, int64_t D, int64_t pool,
                                        uint64_t seed) {
  Rng rng = StreamRng(seed, 0);
  std::vector<int64_t> entries(n);
  for (int64_t& v : entries) {
    v = UniformIndex(rng, 3) == 0
            ? 0
            : 1 + static_cast<int64_t>(UniformIndex(rng, pool));
  }
  return Dataset::Create(D, std::move(entries));
}

std::vector<std::vector<double>> RandomizedResponse(double eps) {
  const double keep = std::exp(eps) / (1 + std::exp(eps));
  return {{keep, 1 - keep}, {1 - keep, keep}};
}

}  // namespace

int RequiredCount(double rate, int trials) {
  return static_cast<int>(std::ceil(rate * trials - 1e-9));
}

absl::StatusOr<Report> ParityIdentity(const ParityIdentityOptions& options) {
  Report report;
  report.pass = true;
  double worst = 0.0;
  Json rows = Json::array();
  for (int64_t n : options.ns) {
    for (double eps0 : options.eps0s) {
      const double q = countdistinct::QPrime(static_cast<double>(n), eps0);
      ASSIGN_OR_RETURN(dist::DiscretePMF pmf,
                       dist::PmfOf(dist::DistSpec::Binomial(n, q)));
      const double mass = dist::ParityMass(pmf);
      const double target = std::exp(-eps0) / 2;
      const double err = std::abs(mass - target);
      worst = std::max(worst, err);
      const bool ok = err <= options.tolerance;
      report.pass = report.pass && ok;
      rows.push_back({{"n", n},
                      {"eps0", eps0},
                      {"q_prime", q},
                      {"parity_mass", mass},
                      {"target", target},
                      {"abs_error", err},
                      {"pass", ok}});
    }
  }
  report.data["rows"] = rows;
  report.data["max_abs_error"] = worst;
  report.data["tolerance"] = options.tolerance;
  report.data["pass"] = report.pass;
  report.summary = absl::StrFormat(
      "parity mass of Bin(n, q') vs e^-eps0 / 2: max |err| = %.2e (tol %.0e) "
      "over %d cases",
      worst, options.tolerance, static_cast<int>(rows.size()));
  return report;
}

absl::StatusOr<Report> PrivacyAudit(const PrivacyAuditOptions& options) {
  Report report;
  report.pass = true;
  double worst_ratio = 0.0;
  Json rows = Json::array();
  for (int64_t n : options.ns) {
    for (double eps : options.epsilons) {
      for (double delta : options.deltas) {
        ASSIGN_OR_RETURN(countdistinct::ProtocolParams params,
                         countdistinct::SetGlobalConstants(n, eps, delta));
        for (int64_t m_i : options.holders) {
          ASSIGN_OR_RETURN(audit::ProtocolAudit a,
                           audit::AuditProtocol1d(params, m_i));
          const double worst =
              std::max(a.forward.Upper(), a.backward.Upper());
          worst_ratio = std::max(worst_ratio, worst / a.bound);
          report.pass = report.pass && a.pass;
          rows.push_back({{"n", n},
                          {"eps", eps},
                          {"delta", delta},
                          {"holders", m_i},
                          {"forward", a.forward.value},
                          {"backward", a.backward.value},
                          {"truncation_error",
                           std::max(a.forward.truncation_error,
                                    a.backward.truncation_error)},
                          {"value", worst},
                          {"bound", a.bound},
                          {"pass", a.pass}});
        }
      }
    }
  }
  report.data["rows"] = rows;
  report.data["max_value_over_bound"] = worst_ratio;
  report.data["pass"] = report.pass;
  report.summary = absl::StrFormat(
      "one-coordinate divergences plus truncation <= delta/3 on %d settings; "
      "worst value/bound = %.3g",
      static_cast<int>(rows.size()), worst_ratio);
  return report;
}

absl::StatusOr<Report> CountDistinctRun(const CountDistinctOptions& options) {
  if (options.trials < 1) return absl::InvalidArgumentError("trials must be >= 1");
  if (!(options.gamma > 0.0 && options.gamma <= 1.0)) {
    return absl::InvalidArgumentError("gamma must lie in (0, 1]");
  }
  const int64_t pool = options.pool > 0 ? options.pool : options.D * 3 / 5;
  if (pool < 1 || pool > options.D) {
    return absl::InvalidArgumentError("pool must lie in [1, D]");
  }
  ASSIGN_OR_RETURN(Dataset data, SyntheticInputs(options.n, options.D, pool,
                                                 StreamSeed(options.seed, 0)));
  ASSIGN_OR_RETURN(countdistinct::ProtocolParams params,
                   countdistinct::SetGlobalConstants(options.n, options.epsilon,
                                                     options.delta));
  const bool robust = options.gamma < 1.0;
  const double truth = static_cast<double>(data.DistinctNonzero());
  const double threshold =
      options.c * std::sqrt(static_cast<double>(options.D)) / options.epsilon;
  std::vector<double> errors, messages;
  Json trials = Json::array();
  PublicRandomness pub(absl::StrCat("countdistinct-", options.seed));
  for (int t = 0; t < options.trials; ++t) {
    const uint64_t trial_seed = StreamSeed(StreamSeed(options.seed, 1), t);
    double estimate = 0.0;
    int64_t messages_total = -1;
    if (options.public_coin) {
      ASSIGN_OR_RETURN(countdistinct::PublicCoinResult r,
                       countdistinct::PublicCoinRun(
                           data.entries(), options.epsilon, options.delta, pub,
                           trial_seed, {.engine = options.engine}));
      estimate = r.estimate;
      messages_total = r.messages_total;
    } else if (robust) {
      ASSIGN_OR_RETURN(estimate, countdistinct::RobustRun(
                                     data, options.epsilon, options.delta,
                                     options.gamma, options.engine, trial_seed));
    } else {
      ASSIGN_OR_RETURN(TranscriptHistogram hist,
                       countdistinct::RunProtocol(data, params, options.engine,
                                                  trial_seed));
      estimate = countdistinct::Analyze(hist, options.D, params);
      messages_total = hist.total();
    }
    const double error = std::abs(estimate - truth);
    errors.push_back(error);
    Json row = {{"true_count", truth},
                {"estimate", estimate},
                {"reported", std::clamp(estimate, 0.0,
                                        static_cast<double>(options.n))},
                {"error", error}};
    if (messages_total >= 0) {
      row["messages_total"] = messages_total;
      messages.push_back(static_cast<double>(messages_total));
    }
    trials.push_back(row);
  }
  const int within = static_cast<int>(std::count_if(
      errors.begin(), errors.end(),
      [&](double e) { return e <= threshold; }));
  const int required = RequiredCount(options.pass_rate, options.trials);
  Report report;
  report.pass = within >= required;
  Json& d = report.data;
  d["parameters"] = {{"n", options.n},
                     {"D", options.D},
                     {"eps", options.epsilon},
                     {"delta", options.delta},
                     {"gamma", options.gamma},
                     {"public_coin", options.public_coin},
                     {"engine", options.engine == countdistinct::Engine::kPerUser
                                    ? "per-user"
                                    : "aggregate"},
                     {"seed", options.seed},
                     {"c", options.c}};
  d["trials"] = options.trials;
  d["q_prime"] = params.q_prime;
  d["eps0"] = params.epsilon0;
  d["errors"] = errors;
  d["messages_mean"] =
      messages.empty() ? 0.0 : Moments(messages).mean / options.n;
  d["per_trial"] = trials;
  d["error_quantiles"] = Quantiles(errors);
  d["threshold"] = threshold;
  d["within_threshold"] = within;
  d["required"] = required;
  d["pass"] = report.pass;
  report.summary = absl::StrFormat(
      "%d/%d trials with error <= %.0f sqrt(D)/eps = %.0f (need %d); median "
      "error %.1f",
      within, options.trials, options.c, threshold, required,
      Quantile(errors, 0.5));
  return report;
}

absl::StatusOr<Report> MessageComplexity(
    const MessageComplexityOptions& options) {
  Report report;
  Json& d = report.data;
  // Public-coin protocol at the requested scale.
  ASSIGN_OR_RETURN(countdistinct::PublicCoinConfig config,
                   countdistinct::MakePublicCoinConfig(
                       options.n, options.epsilon, options.delta));
  const bool nonvacuous = config.D >= 1;
  d["public_coin"] = {{"n", options.n},
                      {"eps", options.epsilon},
                      {"delta", options.delta},
                      {"D", config.D},
                      {"messages_per_user_at_D1",
                       countdistinct::ExpectedMessagesPerUser(config.params, 1)},
                      {"trivial_regime", !nonvacuous}};

  // Base protocol: empirical mean against 1/2 + D (q' + 2 E[NB]).
  const int64_t D = options.base_D;
  Rng rng = StreamRng(options.seed, 0);
  std::vector<double> counts;
  counts.reserve(options.invocations);
  for (int64_t i = 0; i < options.invocations; ++i) {
    ASSIGN_OR_RETURN(TranscriptHistogram h,
                     countdistinct::Randomize(1 + i % D, D, config.params, rng));
    counts.push_back(static_cast<double>(h.total()));
  }
  const MeanSd base = Moments(counts);
  const double base_se = base.sd / std::sqrt(static_cast<double>(counts.size()));
  const double analytic =
      countdistinct::ExpectedMessagesPerUser(config.params, D);
  const bool base_ok = std::abs(base.mean - analytic) <= 3 * base_se;
  d["base"] = {{"D", D},
               {"invocations", options.invocations},
               {"mean", base.mean},
               {"standard_error", base_se},
               {"analytic", analytic},
               {"pass", base_ok}};

  // Smallest scale with a nonempty universe: not gating.
  const double supp_delta = 1.0 / static_cast<double>(options.supplementary_n);
  ASSIGN_OR_RETURN(countdistinct::PublicCoinConfig supp,
                   countdistinct::MakePublicCoinConfig(
                       options.supplementary_n, options.epsilon, supp_delta));
  Json supp_json = {{"n", options.supplementary_n},
                    {"delta", supp_delta},
                    {"D", supp.D}};
  if (supp.D >= 1) {
    PublicRandomness pub(absl::StrCat("messages-", options.seed));
    Rng srng = StreamRng(options.seed, 1);
    std::vector<double> sc;
    sc.reserve(options.invocations);
    for (int64_t i = 0; i < options.invocations; ++i) {
      const int64_t x = countdistinct::PublicCoinRemap(
          1 + static_cast<int64_t>(UniformIndex(srng, options.supplementary_n)),
          options.supplementary_n, supp.D, pub);
      ASSIGN_OR_RETURN(TranscriptHistogram h,
                       countdistinct::Randomize(x, supp.D, supp.params, srng));
      sc.push_back(static_cast<double>(h.total()));
    }
    const MeanSd m = Moments(sc);
    const double se = m.sd / std::sqrt(static_cast<double>(sc.size()));
    supp_json["mean"] = m.mean;
    supp_json["standard_error"] = se;
    supp_json["pass"] = m.mean <= 1.0 + 3 * se;
  }
  d["supplementary"] = supp_json;

  report.pass = nonvacuous && base_ok;
  d["pass"] = report.pass;
  report.summary = absl::StrFormat(
      "public coin at n=%d: searched D = %d%s; base mean %.2f vs analytic "
      "%.2f (%s); at n=%d, delta=1/n: D = %d, mean %s messages/user",
      options.n, config.D,
      nonvacuous ? "" : " (trivial regime: no universe fits one message)",
      base.mean, analytic, Verdict(base_ok), options.supplementary_n, supp.D,
      supp_json.contains("mean")
          ? absl::StrFormat("%.3f", supp_json["mean"].get<double>())
          : std::string("n/a"));
  return report;
}

absl::StatusOr<Report> LocalWeak(const LocalWeakOptions& options) {
  Report report;
  Json& d = report.data;
  bool eps_ok = true;
  Json eps_rows = Json::array();
  for (int64_t n : options.ns) {
    ASSIGN_OR_RETURN(countdistinct::LocalWeakParams p,
                     countdistinct::MakeLocalWeakParams(n));
    const double limit = std::log(static_cast<double>(n)) + 3;
    const bool ok = p.epsilon_local <= limit;
    eps_ok = eps_ok && ok;
    eps_rows.push_back({{"n", n},
                        {"q_prime", p.q_prime},
                        {"epsilon_local", p.epsilon_local},
                        {"limit", limit},
                        {"pass", ok}});
  }
  d["epsilon_local"] = eps_rows;

  const int64_t n = options.accuracy_n;
  ASSIGN_OR_RETURN(countdistinct::LocalWeakParams p,
                   countdistinct::MakeLocalWeakParams(n));
  Rng data_rng = StreamRng(options.seed, 0);
  std::vector<int64_t> entries(n);
  for (int64_t& v : entries) v = 1 + static_cast<int64_t>(UniformIndex(data_rng, n));
  ASSIGN_OR_RETURN(Dataset data, Dataset::Create(n, entries));
  const double truth = static_cast<double>(data.DistinctNonzero());
  const double threshold = options.c * std::sqrt(static_cast<double>(n));
  std::vector<double> errors;
  for (int t = 0; t < options.trials; ++t) {
    const uint64_t trial_seed = StreamSeed(StreamSeed(options.seed, 1), t);
    std::vector<countdistinct::IndicatorHistogram> outputs;
    outputs.reserve(n);
    for (int64_t i = 0; i < n; ++i) {
      Rng rng = StreamRng(trial_seed, i);
      ASSIGN_OR_RETURN(countdistinct::IndicatorHistogram h,
                       countdistinct::LocalWeakRandomize(data[i], p, rng));
      outputs.push_back(std::move(h));
    }
    errors.push_back(std::abs(countdistinct::LocalWeakAnalyze(outputs, p) - truth));
  }
  const int within = static_cast<int>(std::count_if(
      errors.begin(), errors.end(), [&](double e) { return e <= threshold; }));
  const int required = RequiredCount(options.pass_rate, options.trials);
  const bool acc_ok = within >= required;
  d["accuracy"] = {{"n", n},
                   {"true_count", truth},
                   {"trials", options.trials},
                   {"errors", errors},
                   {"error_quantiles", Quantiles(errors)},
                   {"threshold", threshold},
                   {"within_threshold", within},
                   {"required", required},
                   {"pass", acc_ok}};
  report.pass = eps_ok && acc_ok;
  d["pass"] = report.pass;
  double worst_gap = -1e300;
  for (const Json& r : eps_rows) {
    worst_gap = std::max(worst_gap, r["epsilon_local"].get<double>() -
                                        r["limit"].get<double>() + 3);
  }
  report.summary = absl::StrFormat(
      "eps_local - ln n <= %.3f (limit 3, %s); %d/%d trials with error <= "
      "%.0f sqrt(n) at n=%d (need %d)",
      worst_gap, Verdict(eps_ok), within, options.trials, options.c, n,
      required);
  return report;
}

namespace {

// max U_0 - V_0 over laws on {0} U [1, Lambda] with unit mean and L matched
// moments, in closed form.
double ClosedFormGap(double Lambda, int L) {
  const double s = std::sqrt(Lambda);
  return (1 + s) * (1 + s) / Lambda * std::pow((s - 1) / (s + 1), L);
}

double ClosedFormMinimalC(int L, double target) {
  double lo = 1.0, hi = 1e5;
  for (int it = 0; it < 200; ++it) {
    const double mid = (lo + hi) / 2;
    (ClosedFormGap(mid * L * L, L) > target ? hi : lo) = mid;
  }
  return hi;
}

}  // namespace

absl::StatusOr<Report> MomentMatching(const MomentMatchingOptions& options) {
  Report report;
  report.pass = true;
  Json rows = Json::array();
  std::string gaps;
  for (int L : options.Ls) {
    const double Lambda = options.c * L * L;
    ASSIGN_OR_RETURN(hardness::MomentPair pair,
                     hardness::MatchMoments(L, Lambda, options.grid_step));
    const hardness::MomentReport check = hardness::VerifyMoments(pair);
    const bool moments_ok = check.max_relative_mismatch <= options.tolerance;
    const bool recompute_ok = std::abs(check.gap - pair.gap) <= 1e-9;
    const bool gap_ok = pair.gap > options.target_gap;
    const bool ok = moments_ok && recompute_ok && gap_ok;
    report.pass = report.pass && ok;
    rows.push_back({{"L", L},
                    {"Lambda", Lambda},
                    {"gap", pair.gap},
                    {"closed_form_gap", ClosedFormGap(Lambda, L)},
                    {"max_relative_mismatch", check.max_relative_mismatch},
                    {"recomputed_gap", check.gap},
                    {"support_size", pair.support.size()},
                    {"closed_form_minimal_c",
                     ClosedFormMinimalC(L, options.target_gap)},
                    {"pass", ok}});
    absl::StrAppend(&gaps, gaps.empty() ? "" : ", ",
                    absl::StrFormat("L=%d gap %.4f (mismatch %.1e, c for "
                                    "gap>%.1f: %.0f)",
                                    L, pair.gap, check.max_relative_mismatch,
                                    options.target_gap,
                                    ClosedFormMinimalC(L, options.target_gap)));
  }
  report.data["c"] = options.c;
  report.data["grid_step"] = options.grid_step;
  report.data["target_gap"] = options.target_gap;
  report.data["rows"] = rows;
  report.data["pass"] = report.pass;
  report.summary = absl::StrFormat("at Lambda = %.0f L^2: %s", options.c, gaps);
  return report;
}

absl::StatusOr<Report> PoissonTv(const PoissonTvOptions& options) {
  const double Lambda = options.c * options.L * options.L;
  ASSIGN_OR_RETURN(hardness::MomentPair pair,
                   hardness::MatchMoments(options.L, Lambda, options.grid_step));
  const std::vector<double> theta(options.dimension, 1.0 / options.dimension);
  std::vector<double> lambda(options.dimension);
  for (int i = 0; i < options.dimension; ++i) {
    lambda[i] = 2 * Lambda * Lambda * theta[i];
  }
  ASSIGN_OR_RETURN(audit::PoissonTvBound bound,
                   audit::PoissonTvBoundFor(pair, theta, lambda, options.L));
  Rng rng = StreamRng(options.seed, 0);
  ASSIGN_OR_RETURN(audit::PoissonTvEstimate est,
                   audit::PoissonTvEmpirical(pair, theta, lambda,
                                             options.samples, rng,
                                             options.bootstrap_rounds));
  const double inv_fact = 1.0 / std::tgamma(options.L + 1.0);
  const double empirical_limit = std::sqrt(inv_fact) + 3 * est.sigma;
  const bool empirical_ok = est.tv <= empirical_limit;
  const bool bound_ok = bound.applicable && bound.bound <= inv_fact;
  Report report;
  report.pass = empirical_ok && bound_ok;
  report.data = {{"L", options.L},
                 {"dimension", options.dimension},
                 {"Lambda", Lambda},
                 {"gap", pair.gap},
                 {"samples", est.samples},
                 {"tv", est.tv},
                 {"sigma", est.sigma},
                 {"empirical_limit", empirical_limit},
                 {"analytic_bound", bound.bound},
                 {"alpha_l1", bound.alpha_l1},
                 {"coverage", bound.coverage},
                 {"inverse_factorial", inv_fact},
                 {"pass", report.pass}};
  report.summary = absl::StrFormat(
      "TV estimate %.2e +- %.1e <= %.2e (%s); analytic tail %.2e <= 1/L! = "
      "%.2e (%s)",
      est.tv, est.sigma, empirical_limit, Verdict(empirical_ok), bound.bound,
      inv_fact, Verdict(bound_ok));
  return report;
}

absl::StatusOr<Report> ParityDistinct(const ParityDistinctOptions& options) {
  if (options.D < 2 || options.D > 24) {
    return absl::InvalidArgumentError("D must lie in [2, 24]");
  }
  const int64_t n = int64_t{1} << options.D;
  const double limit = options.multiple * std::sqrt(static_cast<double>(n));
  const int required = RequiredCount(options.pass_rate, options.seeds);
  Report report;
  report.pass = true;
  Json rows = Json::array();
  std::string parts;
  for (size_t a = 0; a < options.alphas.size(); ++a) {
    const double alpha = options.alphas[a];
    const double expected = hardness::ExpectedDistinct(alpha, n);
    int within = 0;
    double worst = 0.0;
    for (int t = 0; t < options.seeds; ++t) {
      Rng rng = StreamRng(StreamSeed(options.seed, a), t);
      hardness::ParityMixtureSpec spec{
          options.D, t % 2, 1 + UniformIndex(rng, static_cast<uint64_t>(n) - 1),
          alpha};
      ASSIGN_OR_RETURN(Dataset sample,
                       hardness::SampleParityMixture(spec, n, rng));
      const double dev =
          std::abs(static_cast<double>(sample.DistinctNonzero()) - expected);
      worst = std::max(worst, dev);
      within += dev <= limit;
    }
    const bool ok = within >= required;
    report.pass = report.pass && ok;
    rows.push_back({{"alpha", alpha},
                    {"expected", expected},
                    {"within", within},
                    {"seeds", options.seeds},
                    {"worst_deviation", worst},
                    {"pass", ok}});
    absl::StrAppend(&parts, parts.empty() ? "" : ", ",
                    absl::StrFormat("alpha=%.2f %d/%d (worst %.1f sqrt n)",
                                    alpha, within, options.seeds,
                                    worst / std::sqrt(static_cast<double>(n))));
  }
  report.data = {{"n", n}, {"limit", limit}, {"rows", rows},
                 {"pass", report.pass}};
  report.summary = absl::StrFormat(
      "distinct count within %.0f sqrt(n) of (1 - cosh(alpha)/e) n at n=2^%d: "
      "%s (need %d)",
      options.multiple, options.D, parts, required);
  return report;
}

namespace {

std::vector<double> RandomLaw(int size, Rng& rng, double sparsity = 0.0) {
  std::vector<double> row(size);
  double total = 0.0;
  for (double& v : row) {
    v = UniformDouble(rng) < sparsity ? 0.0 : -std::log1p(-UniformDouble(rng));
    total += v;
  }
  if (total == 0.0) row[0] = total = 1.0;
  for (double& v : row) v /= total;
  return row;
}

RandomizerMatrix RandomMatrix(int inputs, int messages, Rng& rng,
                              double sparsity = 0.0) {
  std::vector<std::vector<double>> rows;
  for (int x = 0; x < inputs; ++x) {
    rows.push_back(RandomLaw(messages, rng, sparsity));
  }
  return *RandomizerMatrix::Create(std::move(rows));
}

// Rows D_z w_{x,z} / <D, w_x> with w in [1, e^eps].
RandomizerMatrix DominatedMatrix(int inputs, int messages, double eps,
                                 Rng& rng) {
  const std::vector<double> base = RandomLaw(messages, rng);
  std::vector<std::vector<double>> rows;
  for (int x = 0; x < inputs; ++x) {
    std::vector<double> row(messages);
    double total = 0.0;
    for (int z = 0; z < messages; ++z) {
      total += row[z] = base[z] * std::exp(eps * UniformDouble(rng));
    }
    for (double& v : row) v /= total;
    rows.push_back(std::move(row));
  }
  return *RandomizerMatrix::Create(std::move(rows));
}

// Two independent randomized-response bits of a binary input.
MultiMessageRandomizer TwoBitResponse(double keep) {
  const double a = keep, b = 1 - keep;
  return *MakeMultiMessage(
      *RandomizerMatrix::Create({{a * a, 2 * a * b, b * b},
                                 {b * b, 2 * a * b, a * a}}),
      2, 2);
}

// Small multi-message randomizers used by the exhaustive checks.
std::vector<std::pair<std::string, MultiMessageRandomizer>> SmallRandomizers(
    uint64_t seed) {
  std::vector<std::pair<std::string, MultiMessageRandomizer>> out;
  for (double keep : {0.6, 0.75, 0.9}) {
    const double b = 1 - keep;
    out.emplace_back(
        absl::StrFormat("rr(%.2f)", keep),
        AsMultiMessage(*RandomizerMatrix::Create({{keep, b}, {b, keep}})));
    out.emplace_back(absl::StrFormat("two-bit-rr(%.2f)", keep),
                     TwoBitResponse(keep));
  }
  Rng rng = StreamRng(seed, 0);
  for (int i = 0; i < 3; ++i) {
    out.emplace_back(absl::StrCat("random-3x3-", i),
                     AsMultiMessage(RandomMatrix(3, 3, rng)));
    out.emplace_back(absl::StrCat("random-2x(3 choose 2)-", i),
                     *MakeMultiMessage(RandomMatrix(2, 6, rng), 3, 2));
  }
  return out;
}

}  // namespace

absl::StatusOr<Report> Dominated(const DominatedOptions& options) {
  Report report;
  Json& d = report.data;

  // Domination never needs a larger eps than local privacy.
  Rng rng_a = StreamRng(options.seed, 0);
  int a_ok = 0;
  double a_slack = 1e300;
  for (int t = 0; t < options.instances; ++t) {
    RandomizerMatrix m =
        RandomMatrix(2 + t % 4, 2 + t % 5, rng_a, t % 3 == 0 ? 0.2 : 0.0);
    const double delta = t % 2 == 0 ? 0.0 : 0.05;
    ASSIGN_OR_RETURN(audit::DominationCertificate c,
                     audit::FindMinDomination(m, delta));
    const double ldp = audit::ExactLdpEpsilon(m, delta);
    a_ok += c.epsilon_star <= ldp + 1e-9;
    a_slack = std::min(a_slack, ldp - c.epsilon_star);
  }
  const bool part_a = a_ok == options.instances;
  d["domination_vs_ldp"] = {{"instances", options.instances},
                            {"pass_count", a_ok},
                            {"min_ldp_minus_domination", a_slack},
                            {"pass", part_a}};

  // KL bound for both W kinds on dominated randomizers over {0,1}^4.
  const int D = 4;
  const std::vector<double> mu(1 << D, 1.0 / (1 << D));
  ASSIGN_OR_RETURN(std::vector<std::vector<double>> parseval,
                   audit::ParsevalFamily(D, 0.8));
  const std::vector<std::vector<double>> level1 = audit::Level1Family(D);
  const std::vector<double> wp(parseval.size(), 1.0 / parseval.size());
  const std::vector<double> wl(level1.size(), 1.0 / level1.size());
  Rng rng_b = StreamRng(options.seed, 1);
  int b_ok = 0;
  double b_ratio = 0.0;
  for (int t = 0; t < options.instances; ++t) {
    const double eps = 0.2 + 1.8 * t / std::max(1, options.instances - 1);
    RandomizerMatrix m = DominatedMatrix(1 << D, 2 + t % 6, eps, rng_b);
    ASSIGN_OR_RETURN(audit::KlCheck p,
                     audit::DominatedKlCheck(m, parseval, mu, wp, eps, 0,
                                             audit::WKind::Parseval(0.8, D)));
    ASSIGN_OR_RETURN(audit::KlCheck l,
                     audit::DominatedKlCheck(m, level1, mu, wl, eps, 0,
                                             audit::WKind::Level1(D)));
    b_ok += (p.lhs <= p.rhs) + (l.lhs <= l.rhs);
    if (p.rhs > 0) b_ratio = std::max(b_ratio, p.lhs / p.rhs);
    if (l.rhs > 0) b_ratio = std::max(b_ratio, l.lhs / l.rhs);
  }
  const bool part_b = b_ok == 2 * options.instances;
  d["kl_bound"] = {{"checks", 2 * options.instances},
                   {"pass_count", b_ok},
                   {"max_lhs_over_rhs", b_ratio},
                   {"pass", part_b}};

  // Pseudo-local inequality on every small randomizer and n <= 4.
  int c_total = 0, c_ok = 0;
  double c_ratio = 0.0;
  Json c_rows = Json::array();
  for (const auto& [name, r] : SmallRandomizers(StreamSeed(options.seed, 2))) {
    for (int n = 1; n <= 4; ++n) {
      ASSIGN_OR_RETURN(double delta, audit::ShuffleDelta(r, n, 1.0));
      ASSIGN_OR_RETURN(audit::PseudoLocalReport pl,
                       audit::PseudoLocalCheck(r, n, 1.0, delta));
      ++c_total;
      c_ok += pl.pass;
      if (delta > 0) c_ratio = std::max(c_ratio, pl.worst / delta);
      c_rows.push_back({{"randomizer", name},
                        {"n", n},
                        {"delta", delta},
                        {"epsilon_used", pl.epsilon_used},
                        {"worst", pl.worst},
                        {"pass", pl.pass}});
    }
  }
  const bool part_c = c_ok == c_total;
  d["pseudo_local"] = {{"instances", c_total},
                       {"pass_count", c_ok},
                       {"rows", c_rows},
                       {"pass", part_c}};

  report.pass = part_a && part_b && part_c;
  d["pass"] = report.pass;
  report.summary = absl::StrFormat(
      "(a) domination <= LDP eps %d/%d; (b) KL lhs <= rhs %d/%d (max ratio "
      "%.3f); (c) pseudo-local %d/%d",
      a_ok, options.instances, b_ok, 2 * options.instances, b_ratio, c_ok,
      c_total);
  return report;
}

std::vector<audit::HsPoint> DefaultIdentityGrid() {
  std::vector<audit::HsPoint> grid;
  for (int64_t m : {1, 2, 3, 5, 10, 20, 50, 100, 200, 500, 1000, 2000, 5000,
                    10000}) {
    for (double alpha : {0.05, 0.2, 0.5, 0.8, 0.99}) {
      for (double beta : {1e-4, 1e-3, 1e-2, 0.03, 0.1}) {
        for (double eps : {0.0, 0.1, 0.5, 1.0, 2.0}) {
          if (alpha > std::exp(eps) * beta) grid.push_back({m, alpha, beta, eps});
        }
      }
    }
  }
  return grid;
}

absl::StatusOr<Report> HsBound(const HsBoundOptions& options) {
  const std::vector<audit::HsPoint> identity = options.identity_grid.empty()
                                                   ? DefaultIdentityGrid()
                                                   : options.identity_grid;
  double worst = 0.0;
  for (const audit::HsPoint& p : identity) {
    ASSIGN_OR_RETURN(double exact, audit::HsExact(p.m, p.alpha, p.beta, p.eps));
    ASSIGN_OR_RETURN(double shift,
                     audit::HsShiftForm(p.m, p.alpha, p.beta, p.eps));
    worst = std::max(worst, std::abs(exact - shift));
  }
  const bool identity_ok = worst <= options.identity_tolerance;
  const std::vector<audit::HsPoint> train =
      options.train.empty() ? audit::HsTrainingGrid() : options.train;
  const std::vector<audit::HsPoint> validate =
      options.validate.empty() ? audit::HsValidationGrid() : options.validate;
  ASSIGN_OR_RETURN(audit::HsFit fit, audit::FitAndValidateC0(train, validate));
  const bool fit_ok = fit.violations == 0;
  Report report;
  report.pass = identity_ok && fit_ok;
  report.data = {{"identity_points", identity.size()},
                 {"identity_max_abs_error", worst},
                 {"identity_tolerance", options.identity_tolerance},
                 {"train_points", train.size()},
                 {"validate_points", validate.size()},
                 {"c0", fit.c0},
                 {"violations", fit.violations},
                 {"min_exact_over_bound", fit.worst_ratio},
                 {"pass", report.pass}};
  report.summary = absl::StrFormat(
      "shift identity max |err| %.1e on %d points (tol %.0e); c0 = %.4f fit "
      "on %d points, %d violations on %d held-out points (min exact/bound "
      "%.2f)",
      worst, static_cast<int>(identity.size()), options.identity_tolerance,
      fit.c0, static_cast<int>(train.size()), fit.violations,
      static_cast<int>(validate.size()), fit.worst_ratio);
  return report;
}

absl::StatusOr<Report> SqSimulation(const SqSimulationOptions& options) {
  ASSIGN_OR_RETURN(RandomizerMatrix m,
                   RandomizerMatrix::Create(options.matrix.empty()
                                                ? RandomizedResponse(std::log(3.0))
                                                : options.matrix));
  std::vector<double> input = options.input;
  if (input.empty()) input.assign(m.num_inputs(), 1.0 / m.num_inputs());
  if (static_cast<int>(input.size()) != m.num_inputs()) {
    return absl::InvalidArgumentError("input law has the wrong size");
  }
  if (options.runs < 1) return absl::InvalidArgumentError("runs must be >= 1");
  ASSIGN_OR_RETURN(audit::DominationCertificate cert,
                   audit::FindMinDomination(m, 0.0));
  ASSIGN_OR_RETURN(sq::SqOracle oracle,
                   sq::SqOracle::Create(input, options.mode,
                                        StreamSeed(options.seed, 0)));
  Rng rng = StreamRng(options.seed, 1);
  std::vector<int64_t> counts(m.num_messages(), 0);
  int64_t queries = 0;
  for (int64_t i = 0; i < options.runs; ++i) {
    ASSIGN_OR_RETURN(sq::Draw draw, sq::SimulateDominated(m, cert, options.beta,
                                                          oracle, rng));
    ++counts[draw.message];
    queries += draw.queries;
  }
  const std::vector<double> target = m.Push(input);
  const double runs = static_cast<double>(options.runs);
  double tv = 0.0, sigma = 0.0;
  std::vector<double> freq(counts.size());
  for (size_t z = 0; z < counts.size(); ++z) {
    freq[z] = counts[z] / runs;
    tv += std::abs(freq[z] - target[z]) / 2;
    sigma += std::sqrt(target[z] * (1 - target[z]) / runs) / 2;
  }
  const double tv_limit = 5 * options.beta + 3 * sigma;
  const double mean_queries = queries / runs;
  const double query_limit = 2 * std::exp(cert.epsilon_star);
  const bool tv_ok = tv <= tv_limit;
  const bool query_ok = mean_queries <= query_limit;
  Report report;
  report.pass = tv_ok && query_ok;
  report.data = {{"beta", options.beta},
                 {"runs", options.runs},
                 {"epsilon_star", cert.epsilon_star},
                 {"dominating", cert.dominating},
                 {"target", target},
                 {"frequencies", freq},
                 {"tv", tv},
                 {"sigma", sigma},
                 {"tv_limit", tv_limit},
                 {"mean_queries", mean_queries},
                 {"query_limit", query_limit},
                 {"pass", report.pass}};
  report.summary = absl::StrFormat(
      "TV %.2e <= 5 beta + 3 sigma = %.2e (%s); mean queries %.3f <= 2 "
      "e^eps* = %.3f (%s)",
      tv, tv_limit, Verdict(tv_ok), mean_queries, query_limit,
      Verdict(query_ok));
  return report;
}

absl::StatusOr<Report> SelectionRun(const SelectionOptions& options) {
  ASSIGN_OR_RETURN(selection::SelectionParams params,
                   selection::Setup(options.D, options.k, options.epsilon,
                                    options.delta, options.n));
  const double high = std::min(1.0, 0.5 + options.planted_gap);
  int successes = 0;
  int64_t max_messages = 0;
  bool budget_ok = true;
  Json trials = Json::array();
  for (int t = 0; t < options.trials; ++t) {
    Rng data_rng = StreamRng(StreamSeed(options.seed, 0), t);
    const int64_t planted =
        1 + static_cast<int64_t>(UniformIndex(data_rng, options.D));
    const std::vector<selection::BitVector> inputs = selection::SamplePlanted(
        params.n, options.D, planted, high, 0.5, data_rng);
    const uint64_t trial_seed = StreamSeed(StreamSeed(options.seed, 1), t);
    TranscriptHistogram transcript;
    for (int64_t i = 0; i < params.n; ++i) {
      Rng rng = StreamRng(trial_seed, i);
      ASSIGN_OR_RETURN(TranscriptHistogram h,
                       selection::Randomize(inputs[i], params, rng));
      max_messages = std::max(max_messages, h.total());
      if (h.total() > params.k) budget_ok = false;
      transcript.Merge(h);
    }
    const selection::SelectionOutcome out =
        selection::Analyze(transcript, params);
    const bool ok = selection::Succeeds(inputs, out.coordinate);
    successes += ok;
    trials.push_back(
        {{"planted", planted}, {"chosen", out.coordinate}, {"success", ok}});
  }
  const int required = RequiredCount(options.pass_rate, options.trials);
  Report report;
  report.pass = budget_ok && successes >= required;
  report.data = {{"parameters",
                  {{"D", options.D},
                   {"k", options.k},
                   {"eps", options.epsilon},
                   {"delta", options.delta},
                   {"planted_gap", options.planted_gap},
                   {"n", params.n},
                   {"m", params.m},
                   {"shares", params.shares},
                   {"modulus", params.modulus},
                   {"seed", options.seed}}},
                 {"per_trial", trials},
                 {"successes", successes},
                 {"required", required},
                 {"max_messages_per_user", max_messages},
                 {"budget_respected", budget_ok},
                 {"pass", report.pass}};
  report.summary = absl::StrFormat(
      "%d/%d planted instances solved at n=%d (need %d); max messages per "
      "user %d <= k=%d (%s)",
      successes, options.trials, params.n, required, max_messages,
      options.k, Verdict(budget_ok));
  return report;
}

namespace {

// Walks every joint choice of per-user output tuples.
audit::TranscriptLaw EnumerateTranscripts(const MultiMessageRandomizer& r,
                                          const std::vector<int>& inputs) {
  audit::TranscriptLaw law;
  const int n = static_cast<int>(inputs.size());
  const int outs = r.matrix.num_messages();
  std::vector<int> pick(n, 0);
  while (true) {
    double prob = 1.0;
    std::vector<int> counts(r.outputs.base(), 0);
    for (int u = 0; u < n; ++u) {
      prob *= r.matrix(inputs[u], pick[u]);
      for (int msg : r.outputs.tuple(pick[u])) ++counts[msg];
    }
    if (prob > 0.0) law[counts] += prob;
    int u = n - 1;
    while (u >= 0 && pick[u] == outs - 1) pick[u--] = 0;
    if (u < 0) break;
    ++pick[u];
  }
  return law;
}

double EnumeratedDivergence(const audit::TranscriptLaw& p,
                            const audit::TranscriptLaw& q, double eps) {
  double s = 0.0;
  for (const auto& [key, mass] : p) {
    auto it = q.find(key);
    s += std::max(0.0, mass - std::exp(eps) * (it == q.end() ? 0.0 : it->second));
  }
  return s;
}

}  // namespace

absl::StatusOr<Report> OracleEquivalence(
    const OracleEquivalenceOptions& options) {
  int64_t cases = 0;
  double worst = 0.0;
  for (const auto& [name, r] : SmallRandomizers(StreamSeed(7, 0))) {
    const int X = r.matrix.num_inputs();
    for (int n = 1; n <= options.max_users; ++n) {
      int64_t total = 1;
      for (int u = 0; u < n; ++u) total *= X;
      for (int64_t code = 0; code < total; ++code) {
        std::vector<int> a(n);
        for (int u = 0, c = code; u < n; ++u, c /= X) a[u] = c % X;
        for (int pos = 0; pos < n; ++pos) {
          for (int v = 0; v < X; ++v) {
            if (v == a[pos]) continue;
            std::vector<int> b = a;
            b[pos] = v;
            std::vector<int64_t> a1(n), b1(n);
            for (int u = 0; u < n; ++u) {
              a1[u] = a[u] + 1;
              b1[u] = b[u] + 1;
            }
            ASSIGN_OR_RETURN(Dataset d1, Dataset::Create(X, a1));
            ASSIGN_OR_RETURN(Dataset d2, Dataset::Create(X, b1));
            const audit::TranscriptLaw p = EnumerateTranscripts(r, a);
            const audit::TranscriptLaw q = EnumerateTranscripts(r, b);
            for (double eps : {0.0, 0.5, 1.0}) {
              ASSIGN_OR_RETURN(double exact,
                               audit::ExactShuffleDivergence(r, d1, d2, eps));
              worst = std::max(worst,
                               std::abs(exact - EnumeratedDivergence(p, q, eps)));
              ++cases;
            }
          }
        }
      }
    }
  }
  Report report;
  report.pass = worst <= options.tolerance;
  report.data = {{"cases", cases},
                 {"max_users", options.max_users},
                 {"max_abs_difference", worst},
                 {"tolerance", options.tolerance},
                 {"pass", report.pass}};
  report.summary = absl::StrFormat(
      "exact shuffle divergence vs per-user enumeration: max |diff| %.1e "
      "(tol %.0e) over %d neighboring pairs and eps values, n <= %d",
      worst, options.tolerance, cases, options.max_users);
  return report;
}

absl::StatusOr<Report> Distinguish(const DistinguishOptions& options) {
  if (options.D < 1 || options.D > 10) {
    return absl::InvalidArgumentError("D must lie in [1, 10]");
  }
  if (!(options.keep >= 0.5 && options.keep <= 1.0)) {
    return absl::InvalidArgumentError("keep must lie in [1/2, 1]");
  }
  const int size = 1 << options.D;
  Rng rng = StreamRng(options.seed, 0);
  const uint64_t s = options.s != 0 ? options.s : 1 + UniformIndex(rng, size - 1);
  const hardness::ParityMixtureSpec spec{options.D, options.ell, s,
                                         options.alpha};
  ASSIGN_OR_RETURN(std::vector<double> planted,
                   hardness::ParityMixtureDistribution(spec));
  const std::vector<double> uniform(size, 1.0 / size);
  std::vector<std::vector<double>> rows(size, std::vector<double>(size));
  for (int x = 0; x < size; ++x) {
    for (int z = 0; z < size; ++z) {
      const int flips = __builtin_popcount(x ^ z);
      rows[x][z] = std::pow(options.keep, options.D - flips) *
                   std::pow(1 - options.keep, flips);
    }
  }
  ASSIGN_OR_RETURN(RandomizerMatrix r, RandomizerMatrix::Create(rows));
  const std::vector<double> p = r.Push(planted);
  const std::vector<double> q = r.Push(uniform);
  double tv = 0.0;
  std::vector<double> llr(size);
  for (int z = 0; z < size; ++z) {
    tv += std::abs(p[z] - q[z]) / 2;
    llr[z] = (p[z] > 0 && q[z] > 0) ? std::log(p[z] / q[z]) : 0.0;
  }
  auto transcript_llr = [&](double alpha) -> absl::StatusOr<double> {
    hardness::ParityMixtureSpec side = spec;
    side.alpha = alpha;
    ASSIGN_OR_RETURN(Dataset sample,
                     hardness::SampleParityMixture(side, options.n, rng));
    double sum = 0.0;
    for (int64_t v : sample.entries()) {
      sum += llr[r.Sample(static_cast<int>(v - 1), rng)];
    }
    return sum;
  };
  int hits = 0, false_alarms = 0;
  for (int t = 0; t < options.trials; ++t) {
    ASSIGN_OR_RETURN(double a, transcript_llr(options.alpha));
    ASSIGN_OR_RETURN(double b, transcript_llr(0.0));
    hits += a > 0;
    false_alarms += b > 0;
  }
  const double advantage =
      static_cast<double>(hits - false_alarms) / options.trials;
  const double sigma = std::sqrt(0.5 / options.trials);
  const double limit = std::min(1.0, options.n * tv) + 3 * sigma;
  Report report;
  report.pass = advantage <= limit;
  report.data = {{"D", options.D},
                 {"ell", options.ell},
                 {"s", s},
                 {"alpha", options.alpha},
                 {"keep", options.keep},
                 {"n", options.n},
                 {"trials", options.trials},
                 {"single_message_tv", tv},
                 {"advantage", advantage},
                 {"sigma", sigma},
                 {"advantage_limit", limit},
                 {"pass", report.pass}};
  report.summary = absl::StrFormat(
      "likelihood-ratio advantage %.3f (n=%d, single-message TV %.2e, limit "
      "%.3f)",
      advantage, options.n, tv, limit);
  return report;
}

absl::StatusOr<std::vector<std::vector<double>>> MatrixFromJson(
    const Json& json) {
  const Json& rows = json.is_object() && json.contains("rows") ? json["rows"]
                                                               : json;
  if (!rows.is_array()) return absl::InvalidArgumentError("matrix: need rows");
  std::vector<std::vector<double>> out;
  for (const Json& row : rows) {
    if (!row.is_array()) {
      return absl::InvalidArgumentError("matrix: every row must be an array");
    }
    std::vector<double> r;
    for (const Json& v : row) {
      if (!v.is_number()) return absl::InvalidArgumentError("matrix: non-number");
      r.push_back(v.get<double>());
    }
    out.push_back(std::move(r));
  }
  return out;
}

absl::StatusOr<std::vector<audit::HsPoint>> HsPointsFromJson(const Json& json) {
  if (!json.is_array()) return absl::InvalidArgumentError("grid: need an array");
  std::vector<audit::HsPoint> out;
  for (const Json& p : json) {
    for (const char* key : {"m", "alpha", "beta", "eps"}) {
      if (!p.is_object() || !p.contains(key) || !p[key].is_number()) {
        return absl::InvalidArgumentError(
            absl::StrCat("grid: point missing numeric key '", key, "'"));
      }
    }
    out.push_back({p["m"].get<int64_t>(), p["alpha"].get<double>(),
                   p["beta"].get<double>(), p["eps"].get<double>()});
  }
  return out;
}

}  // namespace experiments
}  // namespace shuffledp
