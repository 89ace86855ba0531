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

#include "shuffledp/randomizer_matrix.h"

#include <algorithm>
#include <cmath>

#include "absl/strings/str_cat.h"
#include "shuffledp/numeric.h"

namespace shuffledp {
namespace {

void EnumerateTuples(int base, int arity, int start, std::vector<int>& cur,
                     std::vector<std::vector<int>>& out) {
  if (static_cast<int>(cur.size()) == arity) {
    out.push_back(cur);
    return;
  }
  for (int v = start; v < base; ++v) {
    cur.push_back(v);
    EnumerateTuples(base, arity, v, cur, out);
    cur.pop_back();
  }
}

}  // namespace

absl::StatusOr<RandomizerMatrix> RandomizerMatrix::Create(
    std::vector<std::vector<double>> rows) {
  if (rows.empty() || rows.front().empty()) {
    return absl::InvalidArgumentError("empty randomizer matrix");
  }
  const size_t width = rows.front().size();
  for (size_t x = 0; x < rows.size(); ++x) {
    if (rows[x].size() != width) {
      return absl::InvalidArgumentError("ragged randomizer matrix");
    }
    for (double v : rows[x]) {
      if (!(v >= 0.0)) {
        return absl::InvalidArgumentError(
            absl::StrCat("row ", x, " has a negative entry"));
      }
    }
    const double total = StableSum(rows[x]);
    if (std::abs(total - 1.0) > 1e-12) {
      return absl::InvalidArgumentError(
          absl::StrCat("row ", x, " sums to ", total));
    }
  }
  return RandomizerMatrix(std::move(rows));
}

std::vector<double> RandomizerMatrix::Push(
    const std::vector<double>& input_dist) const {
  std::vector<CompensatedSum> acc(num_messages_);
  for (int x = 0; x < num_inputs(); ++x) {
    if (input_dist[x] == 0.0) continue;
    for (int z = 0; z < num_messages_; ++z) {
      acc[z].Add(input_dist[x] * rows_[x][z]);
    }
  }
  std::vector<double> out(num_messages_);
  for (int z = 0; z < num_messages_; ++z) out[z] = acc[z].value();
  return out;
}

dist::DiscretePMF RandomizerMatrix::RowPmf(int x) const {
  dist::DiscretePMF pmf;
  pmf.masses = rows_[x];
  return pmf;
}

int RandomizerMatrix::Sample(int x, Rng& rng) const {
  double u = UniformDouble(rng);
  for (int z = 0; z + 1 < num_messages_; ++z) {
    if (u < rows_[x][z]) return z;
    u -= rows_[x][z];
  }
  return num_messages_ - 1;
}

TupleAlphabet::TupleAlphabet(int base, int arity)
    : base_(base), arity_(arity) {
  std::vector<int> cur;
  EnumerateTuples(base, arity, 0, cur, tuples_);
}

int TupleAlphabet::Index(std::vector<int> tuple) const {
  std::sort(tuple.begin(), tuple.end());
  auto it = std::lower_bound(tuples_.begin(), tuples_.end(), tuple);
  if (it == tuples_.end() || *it != tuple) return -1;
  return static_cast<int>(it - tuples_.begin());
}

MultiMessageRandomizer AsMultiMessage(const RandomizerMatrix& matrix) {
  return {matrix, TupleAlphabet(matrix.num_messages(), 1)};
}

absl::StatusOr<MultiMessageRandomizer> MakeMultiMessage(
    RandomizerMatrix matrix, int base, int arity) {
  TupleAlphabet outputs(base, arity);
  if (outputs.size() != matrix.num_messages()) {
    return absl::InvalidArgumentError(absl::StrCat(
        "matrix has ", matrix.num_messages(), " columns, alphabet has ",
        outputs.size(), " tuples"));
  }
  return MultiMessageRandomizer{std::move(matrix), std::move(outputs)};
}

}  // namespace shuffledp
