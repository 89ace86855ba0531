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

// Finite local randomizers at audit scale.

#ifndef SHUFFLEDP_RANDOMIZER_MATRIX_H_
#define SHUFFLEDP_RANDOMIZER_MATRIX_H_

#include <vector>

#include "absl/status/statusor.h"
#include "shuffledp/distlib.h"
#include "shuffledp/rng.h"

namespace shuffledp {

// Row-stochastic matrix: entry (x, z) is Pr[R(x) = z].
class RandomizerMatrix {
 public:
  static absl::StatusOr<RandomizerMatrix> Create(
      std::vector<std::vector<double>> rows);

  int num_inputs() const { return static_cast<int>(rows_.size()); }
  int num_messages() const { return num_messages_; }
  double operator()(int x, int z) const { return rows_[x][z]; }
  const std::vector<double>& row(int x) const { return rows_[x]; }
  const std::vector<std::vector<double>>& rows() const { return rows_; }

  // Output law when the input is drawn from `input_dist`.
  std::vector<double> Push(const std::vector<double>& input_dist) const;
  // Row x as a PMF over message indices.
  dist::DiscretePMF RowPmf(int x) const;
  int Sample(int x, Rng& rng) const;

 private:
  explicit RandomizerMatrix(std::vector<std::vector<double>> rows)
      : rows_(std::move(rows)),
        num_messages_(static_cast<int>(rows_.front().size())) {}

  std::vector<std::vector<double>> rows_;
  int num_messages_;
};

// Unordered k-tuples over {0, ..., base - 1}, indexed in lexicographic order
// of their sorted form.
class TupleAlphabet {
 public:
  TupleAlphabet(int base, int arity);

  int base() const { return base_; }
  int arity() const { return arity_; }
  int size() const { return static_cast<int>(tuples_.size()); }
  const std::vector<int>& tuple(int index) const { return tuples_[index]; }
  // Index of the multiset holding `tuple`'s entries, in any order.
  int Index(std::vector<int> tuple) const;

 private:
  int base_;
  int arity_;
  std::vector<std::vector<int>> tuples_;
};

// Randomizer emitting `outputs.arity()` messages from a base alphabet; the
// matrix columns are the tuple indices of `outputs`.
struct MultiMessageRandomizer {
  RandomizerMatrix matrix;
  TupleAlphabet outputs;
};

// Single-message randomizer viewed as arity one.
MultiMessageRandomizer AsMultiMessage(const RandomizerMatrix& matrix);

absl::StatusOr<MultiMessageRandomizer> MakeMultiMessage(
    RandomizerMatrix matrix, int base, int arity);

}  // namespace shuffledp

#endif  // SHUFFLEDP_RANDOMIZER_MATRIX_H_
