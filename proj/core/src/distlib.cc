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

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <random>
#include <string>
#include <utility>

#include "absl/strings/str_cat.h"
#include "boost/math/distributions/binomial.hpp"
#include "boost/math/distributions/negative_binomial.hpp"
#include "boost/math/distributions/poisson.hpp"
#include "shuffledp/numeric.h"
#include "shuffledp/status_macros.h"

namespace shuffledp {
namespace dist {
namespace {

constexpr double kNormalizationTolerance = 1e-12;
constexpr double kNegativeMassTolerance = 1e-15;
constexpr int64_t kReanchorInterval = 4096;

// Leaf distribution adapter around a Boost distribution. `ratio(k)` returns
// P(k + 1) / P(k).
template <typename BoostDist, typename Ratio>
absl::StatusOr<DiscretePMF> LeafPmf(const BoostDist& d, int64_t support_max,
                                    int64_t mode, Ratio ratio, double budget) {
  using boost::math::cdf;
  using boost::math::complement;
  using boost::math::pdf;
  const double half = budget / 2;
  try {
    auto lower = [&](int64_t k) { return cdf(d, static_cast<double>(k)); };
    auto upper = [&](int64_t k) {
      return k >= support_max ? 0.0
                              : cdf(complement(d, static_cast<double>(k)));
    };
    // Smallest lo with Pr[X <= lo] > half; outcomes below lo are dropped.
    int64_t lo = 0;
    if (lower(0) <= half) {
      int64_t a = 0, b = mode;
      if (lower(b) <= half) {
        lo = b;
      } else {
        while (b - a > 1) {
          int64_t mid = a + (b - a) / 2;
          if (lower(mid) > half) b = mid; else a = mid;
        }
        lo = b;
      }
    }
    // Smallest hi >= mode with Pr[X > hi] <= half.
    int64_t hi = mode;
    if (upper(hi) > half) {
      int64_t a = hi, step = 1, b = hi;
      while (upper(b) > half) {
        a = b;
        if (support_max - mode <= step) {
          b = support_max;
          break;
        }
        b = mode + step;
        step *= 2;
      }
      while (b - a > 1) {
        int64_t mid = a + (b - a) / 2;
        if (upper(mid) > half) a = mid; else b = mid;
      }
      hi = b;
    }
    if (hi - lo + 1 > kMaxSupportSize) {
      return absl::ResourceExhaustedError(absl::StrCat(
          "truncation budget needs ", hi - lo + 1, " stored outcomes"));
    }
    DiscretePMF out;
    out.offset = lo;
    out.masses.assign(hi - lo + 1, 0.0);
    out.tail_mass = (lo > 0 ? lower(lo - 1) : 0.0) + upper(hi);
    const int64_t anchor = std::clamp(mode, lo, hi);
    long double m = pdf(d, static_cast<double>(anchor));
    out.masses[anchor - lo] = static_cast<double>(m);
    for (int64_t k = anchor + 1; k <= hi; ++k) {
      if ((k - anchor) % kReanchorInterval == 0) {
        m = pdf(d, static_cast<double>(k));
      } else {
        m *= ratio(k - 1);
      }
      out.masses[k - lo] = static_cast<double>(m);
    }
    m = out.masses[anchor - lo];
    for (int64_t k = anchor - 1; k >= lo; --k) {
      if ((anchor - k) % kReanchorInterval == 0) {
        m = pdf(d, static_cast<double>(k));
      } else {
        m /= ratio(k);
      }
      out.masses[k - lo] = static_cast<double>(m);
    }
    return out;
  } catch (const std::exception& e) {
    return absl::InternalError(absl::StrCat("pmf evaluation failed: ", e.what()));
  }
}

absl::StatusOr<DiscretePMF> BinomialPmf(int64_t n, double p, double q,
                                        double budget) {
  if (p == 0.0 || n == 0) return PointPmf(0);
  if (q == 0.0) return PointPmf(n);
  boost::math::binomial_distribution<double> d(static_cast<double>(n), p);
  const long double odds = static_cast<long double>(p) / q;
  const int64_t mode = std::min<int64_t>(
      n, static_cast<int64_t>(std::floor((static_cast<double>(n) + 1) * p)));
  return LeafPmf(
      d, n, mode,
      [n, odds](int64_t k) {
        return static_cast<long double>(n - k) / (k + 1) * odds;
      },
      budget);
}

absl::StatusOr<DiscretePMF> PoissonPmf(double lambda, double budget) {
  if (lambda == 0.0) return PointPmf(0);
  boost::math::poisson_distribution<double> d(lambda);
  const int64_t mode = static_cast<int64_t>(std::floor(lambda));
  const long double l = lambda;
  return LeafPmf(
      d, std::numeric_limits<int64_t>::max(), mode,
      [l](int64_t k) { return l / (k + 1); }, budget);
}

absl::StatusOr<DiscretePMF> NegativeBinomialPmf(double r, double p, double q,
                                                double budget) {
  if (p == 0.0) return PointPmf(0);
  // Boost counts failures before r successes with success fraction q.
  boost::math::negative_binomial_distribution<double> d(r, q);
  const int64_t mode =
      r > 1 ? static_cast<int64_t>(std::floor((r - 1) * p / q)) : 0;
  const long double pl = p, rl = r;
  return LeafPmf(
      d, std::numeric_limits<int64_t>::max(), mode,
      [pl, rl](int64_t k) { return pl * (k + rl) / (k + 1); }, budget);
}

}  // namespace

double DiscretePMF::at(int64_t k) const {
  if (k < offset || k > max_value()) return 0.0;
  return masses[k - offset];
}

double DiscretePMF::StoredMass() const { return StableSum(masses); }

double DiscretePMF::Mean() const {
  CompensatedSum s;
  for (int64_t i = 0; i < size(); ++i) {
    s.Add(static_cast<double>(offset + i) * masses[i]);
  }
  return s.value();
}

absl::Status Validate(DiscretePMF& pmf) {
  if (pmf.masses.empty()) return absl::InvalidArgumentError("empty pmf");
  if (!(pmf.tail_mass >= 0.0)) {
    return absl::InvalidArgumentError("negative tail mass");
  }
  for (double& m : pmf.masses) {
    if (m < 0.0) {
      if (m < -kNegativeMassTolerance) {
        return absl::InvalidArgumentError(absl::StrCat("negative mass ", m));
      }
      m = 0.0;
    }
  }
  double total = pmf.StoredMass() + pmf.tail_mass;
  if (std::abs(total - 1.0) > kNormalizationTolerance) {
    return absl::InvalidArgumentError(
        absl::StrCat("pmf total mass ", total, " is not 1"));
  }
  return absl::OkStatus();
}

DistSpec DistSpec::Bernoulli(double p) {
  DistSpec s(Kind::kBernoulli);
  s.n_ = 1;
  s.p_ = p;
  s.q_ = 1.0 - p;
  return s;
}

DistSpec DistSpec::Binomial(int64_t n, double p) {
  DistSpec s(Kind::kBinomial);
  s.n_ = n;
  s.p_ = p;
  s.q_ = 1.0 - p;
  return s;
}

DistSpec DistSpec::Poisson(double lambda) {
  DistSpec s(Kind::kPoisson);
  s.lambda_ = lambda;
  return s;
}

DistSpec DistSpec::NegativeBinomial(double r, double p) {
  DistSpec s(Kind::kNegativeBinomial);
  s.r_ = r;
  s.p_ = p;
  s.q_ = 1.0 - p;
  return s;
}

DistSpec DistSpec::NegativeBinomialFromComplement(double r,
                                                  double one_minus_p) {
  DistSpec s(Kind::kNegativeBinomial);
  s.r_ = r;
  s.p_ = 1.0 - one_minus_p;
  s.q_ = one_minus_p;
  return s;
}

DistSpec DistSpec::Point(int64_t k) {
  DistSpec s(Kind::kPoint);
  s.point_ = k;
  return s;
}

DistSpec DistSpec::Scaled(DistSpec inner, int64_t factor) {
  DistSpec s(Kind::kScaled);
  s.factor_ = factor;
  s.parts_.push_back(std::move(inner));
  return s;
}

DistSpec DistSpec::Convolution(std::vector<DistSpec> parts) {
  DistSpec s(Kind::kConvolution);
  s.parts_ = std::move(parts);
  return s;
}

DistSpec DistSpec::Mixture(std::vector<double> weights,
                           std::vector<DistSpec> parts) {
  DistSpec s(Kind::kMixture);
  s.weights_ = std::move(weights);
  s.parts_ = std::move(parts);
  return s;
}

absl::Status DistSpec::Validate() const {
  auto prob_ok = [](double p) { return p >= 0.0 && p <= 1.0; };
  switch (kind_) {
    case Kind::kBernoulli:
    case Kind::kBinomial:
      if (!prob_ok(p_)) {
        return absl::InvalidArgumentError(absl::StrCat("p = ", p_));
      }
      if (n_ < 0) return absl::InvalidArgumentError("negative trial count");
      return absl::OkStatus();
    case Kind::kPoisson:
      if (!(lambda_ >= 0.0) || !std::isfinite(lambda_)) {
        return absl::InvalidArgumentError(absl::StrCat("lambda = ", lambda_));
      }
      return absl::OkStatus();
    case Kind::kNegativeBinomial:
      if (!(r_ > 0.0) || !std::isfinite(r_)) {
        return absl::InvalidArgumentError(absl::StrCat("r = ", r_));
      }
      if (!prob_ok(p_) || !prob_ok(q_) || q_ == 0.0) {
        return absl::InvalidArgumentError(absl::StrCat("p = ", p_));
      }
      return absl::OkStatus();
    case Kind::kPoint:
      return absl::OkStatus();
    case Kind::kScaled:
      return parts_.front().Validate();
    case Kind::kConvolution:
      if (parts_.empty()) return absl::InvalidArgumentError("empty convolution");
      for (const DistSpec& part : parts_) RETURN_IF_ERROR(part.Validate());
      return absl::OkStatus();
    case Kind::kMixture: {
      if (parts_.empty() || parts_.size() != weights_.size()) {
        return absl::InvalidArgumentError("mixture weights/parts mismatch");
      }
      CompensatedSum total;
      for (double w : weights_) {
        if (!(w >= 0.0)) return absl::InvalidArgumentError("negative weight");
        total.Add(w);
      }
      if (std::abs(total.value() - 1.0) > kNormalizationTolerance) {
        return absl::InvalidArgumentError("mixture weights do not sum to 1");
      }
      for (const DistSpec& part : parts_) RETURN_IF_ERROR(part.Validate());
      return absl::OkStatus();
    }
  }
  return absl::InternalError("unknown kind");
}

DiscretePMF PointPmf(int64_t k) {
  DiscretePMF out;
  out.offset = k;
  out.masses = {1.0};
  return out;
}

absl::StatusOr<DiscretePMF> PmfOf(const DistSpec& spec, double trunc_budget) {
  if (!(trunc_budget > 0.0) || trunc_budget > 1e-6) {
    return absl::InvalidArgumentError(
        absl::StrCat("truncation budget ", trunc_budget, " not in (0, 1e-6]"));
  }
  RETURN_IF_ERROR(spec.Validate());
  switch (spec.kind()) {
    case DistSpec::Kind::kBernoulli: {
      DiscretePMF out;
      out.masses = {spec.q(), spec.p()};
      return out;
    }
    case DistSpec::Kind::kBinomial:
      return BinomialPmf(spec.n(), spec.p(), spec.q(), trunc_budget);
    case DistSpec::Kind::kPoisson:
      return PoissonPmf(spec.lambda(), trunc_budget);
    case DistSpec::Kind::kNegativeBinomial:
      return NegativeBinomialPmf(spec.r(), spec.p(), spec.q(), trunc_budget);
    case DistSpec::Kind::kPoint:
      return PointPmf(spec.point());
    case DistSpec::Kind::kScaled: {
      ASSIGN_OR_RETURN(DiscretePMF inner,
                       PmfOf(spec.parts().front(), trunc_budget));
      return ScalePmf(inner, spec.factor());
    }
    case DistSpec::Kind::kConvolution: {
      DiscretePMF acc = PointPmf(0);
      for (const DistSpec& part : spec.parts()) {
        ASSIGN_OR_RETURN(DiscretePMF next, PmfOf(part, trunc_budget));
        if (acc.size() + next.size() - 1 > kMaxSupportSize) {
          return absl::ResourceExhaustedError("convolution support too large");
        }
        acc = Convolve(acc, next);
      }
      return acc;
    }
    case DistSpec::Kind::kMixture: {
      std::vector<DiscretePMF> parts;
      for (const DistSpec& part : spec.parts()) {
        ASSIGN_OR_RETURN(DiscretePMF next, PmfOf(part, trunc_budget));
        parts.push_back(std::move(next));
      }
      return MixPmfs(spec.weights(), parts);
    }
  }
  return absl::InternalError("unknown kind");
}

DiscretePMF Convolve(const DiscretePMF& a, const DiscretePMF& b) {
  const DiscretePMF& small = a.size() <= b.size() ? a : b;
  const DiscretePMF& big = a.size() <= b.size() ? b : a;
  DiscretePMF out;
  out.offset = a.offset + b.offset;
  out.masses.assign(a.masses.size() + b.masses.size() - 1, 0.0);
  out.tail_mass = a.tail_mass + b.tail_mass;
  const double* bg = big.masses.data();
  const size_t nb = big.masses.size();
  for (size_t i = 0; i < small.masses.size(); ++i) {
    const double s = small.masses[i];
    if (s == 0.0) continue;
    double* o = out.masses.data() + i;
    for (size_t j = 0; j < nb; ++j) o[j] += s * bg[j];
  }
  return out;
}

DiscretePMF ScalePmf(const DiscretePMF& a, int64_t factor) {
  if (factor == 0) {
    DiscretePMF out = PointPmf(0);
    out.masses[0] = a.StoredMass();
    out.tail_mass = a.tail_mass;
    return out;
  }
  const int64_t stride = factor > 0 ? factor : -factor;
  DiscretePMF out;
  out.tail_mass = a.tail_mass;
  out.masses.assign((a.size() - 1) * stride + 1, 0.0);
  if (factor > 0) {
    out.offset = a.offset * factor;
    for (int64_t i = 0; i < a.size(); ++i) out.masses[i * stride] = a.masses[i];
  } else {
    out.offset = a.max_value() * factor;
    for (int64_t i = 0; i < a.size(); ++i) {
      out.masses[(a.size() - 1 - i) * stride] = a.masses[i];
    }
  }
  return out;
}

absl::StatusOr<DiscretePMF> MixPmfs(const std::vector<double>& weights,
                                    const std::vector<DiscretePMF>& parts) {
  if (weights.size() != parts.size() || parts.empty()) {
    return absl::InvalidArgumentError("mixture weights/parts mismatch");
  }
  int64_t lo = parts[0].min_value(), hi = parts[0].max_value();
  for (const DiscretePMF& part : parts) {
    lo = std::min(lo, part.min_value());
    hi = std::max(hi, part.max_value());
  }
  if (hi - lo + 1 > kMaxSupportSize) {
    return absl::ResourceExhaustedError("mixture support too large");
  }
  DiscretePMF out;
  out.offset = lo;
  out.masses.assign(hi - lo + 1, 0.0);
  for (size_t j = 0; j < parts.size(); ++j) {
    const DiscretePMF& part = parts[j];
    for (int64_t i = 0; i < part.size(); ++i) {
      out.masses[part.offset + i - lo] += weights[j] * part.masses[i];
    }
    out.tail_mass += weights[j] * part.tail_mass;
  }
  return out;
}

HockeyStickValue HockeyStick(const DiscretePMF& p, const DiscretePMF& q,
                             double eps) {
  const double scale = std::exp(eps);
  CompensatedSum sum;
  for (int64_t i = 0; i < p.size(); ++i) {
    const double pk = p.masses[i];
    if (pk == 0.0) continue;
    const double qk = q.at(p.offset + i);
    const double term = qk == 0.0 ? pk : pk - scale * qk;
    if (term > 0.0) sum.Add(term);
  }
  return {sum.value(), p.tail_mass};
}

absl::StatusOr<double> Divergence(const DiscretePMF& p, const DiscretePMF& q,
                                  DivergenceKind kind) {
  CompensatedSum sum;
  switch (kind) {
    case DivergenceKind::kTV: {
      const int64_t lo = std::min(p.min_value(), q.min_value());
      const int64_t hi = std::max(p.max_value(), q.max_value());
      for (int64_t k = lo; k <= hi; ++k) sum.Add(std::abs(p.at(k) - q.at(k)));
      return sum.value() / 2;
    }
    case DivergenceKind::kKL: {
      for (int64_t i = 0; i < p.size(); ++i) {
        const double pk = p.masses[i];
        if (pk == 0.0) continue;
        const double qk = q.at(p.offset + i);
        if (qk == 0.0) {
          return absl::OutOfRangeError("KL divergence is infinite");
        }
        sum.Add(pk * std::log(pk / qk));
      }
      return sum.value();
    }
    case DivergenceKind::kChiSquared: {
      for (int64_t i = 0; i < p.size(); ++i) {
        if (p.masses[i] > 0.0 && q.at(p.offset + i) == 0.0) {
          return absl::OutOfRangeError("chi-squared divergence is infinite");
        }
      }
      for (int64_t i = 0; i < q.size(); ++i) {
        const double qk = q.masses[i];
        if (qk == 0.0) continue;
        const double d = p.at(q.offset + i) - qk;
        sum.Add(d * d / qk);
      }
      return sum.value();
    }
  }
  return absl::InternalError("unknown divergence kind");
}

int64_t Sample(const DistSpec& spec, Rng& rng) {
  switch (spec.kind()) {
    case DistSpec::Kind::kBernoulli:
      return UniformDouble(rng) < spec.p() ? 1 : 0;
    case DistSpec::Kind::kBinomial:
      if (spec.n() == 0 || spec.p() == 0.0) return 0;
      return std::binomial_distribution<int64_t>(spec.n(), spec.p())(rng);
    case DistSpec::Kind::kPoisson:
      if (spec.lambda() == 0.0) return 0;
      return std::poisson_distribution<int64_t>(spec.lambda())(rng);
    case DistSpec::Kind::kNegativeBinomial: {
      if (spec.p() == 0.0) return 0;
      // Gamma-Poisson mixture; exact for real r.
      const double g =
          std::gamma_distribution<double>(spec.r(), spec.p() / spec.q())(rng);
      if (!(g > 0.0)) return 0;
      return std::poisson_distribution<int64_t>(g)(rng);
    }
    case DistSpec::Kind::kPoint:
      return spec.point();
    case DistSpec::Kind::kScaled:
      return spec.factor() * Sample(spec.parts().front(), rng);
    case DistSpec::Kind::kConvolution: {
      int64_t total = 0;
      for (const DistSpec& part : spec.parts()) total += Sample(part, rng);
      return total;
    }
    case DistSpec::Kind::kMixture: {
      double u = UniformDouble(rng);
      const auto& w = spec.weights();
      for (size_t i = 0; i + 1 < w.size(); ++i) {
        if (u < w[i]) return Sample(spec.parts()[i], rng);
        u -= w[i];
      }
      return Sample(spec.parts().back(), rng);
    }
  }
  return 0;
}

double ParityMass(const DiscretePMF& pmf) {
  CompensatedSum sum;
  for (int64_t i = 0; i < pmf.size(); ++i) {
    if (((pmf.offset + i) & 1) != 0) sum.Add(pmf.masses[i]);
  }
  return sum.value();
}

}  // namespace dist
}  // namespace shuffledp
