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

#include <bit>
#include <cmath>

#include "absl/strings/str_cat.h"
#include "shuffledp/hardness.h"
#include "shuffledp/numeric.h"
#include "shuffledp/status_macros.h"

namespace shuffledp {
namespace hardness {
namespace {

absl::StatusOr<int> Dimension(const std::vector<double>& f) {
  const uint64_t size = f.size();
  if (size == 0 || !std::has_single_bit(size)) {
    return absl::InvalidArgumentError("table size must be a power of two");
  }
  const int D = std::countr_zero(size);
  if (D > kMaxFourierDimension) {
    return absl::InvalidArgumentError(absl::StrCat("D = ", D, " > 20"));
  }
  return D;
}

}  // namespace

absl::StatusOr<double> FourierCoefficient(const std::vector<double>& f,
                                          uint64_t s) {
  RETURN_IF_ERROR(Dimension(f).status());
  if (s >= f.size()) return absl::OutOfRangeError("s outside {0,1}^D");
  CompensatedSum sum;
  for (uint64_t x = 0; x < f.size(); ++x) {
    sum.Add((std::popcount(x & s) & 1) ? -f[x] : f[x]);
  }
  return sum.value() / static_cast<double>(f.size());
}

absl::StatusOr<std::vector<double>> FourierTransform(std::vector<double> f) {
  RETURN_IF_ERROR(Dimension(f).status());
  const size_t size = f.size();
  for (size_t h = 1; h < size; h *= 2) {
    for (size_t i = 0; i < size; i += 2 * h) {
      for (size_t j = i; j < i + h; ++j) {
        const double a = f[j], b = f[j + h];
        f[j] = a + b;
        f[j + h] = a - b;
      }
    }
  }
  for (double& v : f) v /= static_cast<double>(size);
  return f;
}

absl::StatusOr<double> Level1Weight(const std::vector<double>& f) {
  ASSIGN_OR_RETURN(int D, Dimension(f));
  double total = 0.0;
  for (int j = 0; j < D; ++j) {
    ASSIGN_OR_RETURN(double c, FourierCoefficient(f, uint64_t{1} << j));
    total += c * c;
  }
  return total;
}

double Expectation(const std::vector<double>& f,
                   const std::vector<double>& dist) {
  CompensatedSum sum;
  for (size_t x = 0; x < f.size(); ++x) sum.Add(f[x] * dist[x]);
  return sum.value();
}

}  // namespace hardness
}  // namespace shuffledp
