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

#ifndef SHUFFLEDP_NUMERIC_H_
#define SHUFFLEDP_NUMERIC_H_

#include <span>

namespace shuffledp {

// Neumaier compensated summation.
class CompensatedSum {
 public:
  void Add(double x);
  double value() const { return sum_ + compensation_; }

 private:
  double sum_ = 0.0;
  double compensation_ = 0.0;
};

double StableSum(std::span<const double> values);

// log(exp(a) + exp(b)) without overflow.
double LogAddExp(double a, double b);

}  // namespace shuffledp

#endif  // SHUFFLEDP_NUMERIC_H_
