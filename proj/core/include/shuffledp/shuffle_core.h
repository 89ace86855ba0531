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

// Execution framework for the shuffle and local models.

#ifndef SHUFFLEDP_SHUFFLE_CORE_H_
#define SHUFFLEDP_SHUFFLE_CORE_H_

#include <cstdint>
#include <functional>
#include <istream>
#include <map>
#include <memory>
#include <ostream>
#include <string>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "shuffledp/rng.h"

namespace shuffledp {

using Message = int64_t;

// Multiset of user inputs over {0} U [D]; 0 means "not counted".
class Dataset {
 public:
  static absl::StatusOr<Dataset> Create(int64_t universe_size,
                                        std::vector<int64_t> entries);

  int64_t universe_size() const { return universe_size_; }
  int64_t size() const { return static_cast<int64_t>(entries_.size()); }
  const std::vector<int64_t>& entries() const { return entries_; }
  int64_t operator[](int64_t i) const { return entries_[i]; }

  // Number of distinct nonzero entries.
  int64_t DistinctNonzero() const;

  // Text form: a header line `D=<int> n=<int>` then one integer per line.
  void Write(std::ostream& out) const;
  static absl::StatusOr<Dataset> Read(std::istream& in);

  friend bool operator==(const Dataset&, const Dataset&) = default;

 private:
  Dataset(int64_t universe_size, std::vector<int64_t> entries)
      : universe_size_(universe_size), entries_(std::move(entries)) {}

  int64_t universe_size_ = 0;
  std::vector<int64_t> entries_;
};

// Copy of `dataset` with entry `index` replaced by `new_value`.
absl::StatusOr<Dataset> Neighboring(const Dataset& dataset, int64_t index,
                                    int64_t new_value);

// Shuffled multiset of messages, kept as counts. Analyzers only ever see
// this type, so they are permutation invariant by construction.
class TranscriptHistogram {
 public:
  void Add(Message m, int64_t count = 1);
  void Merge(const TranscriptHistogram& other);
  int64_t count(Message m) const;
  int64_t total() const { return total_; }
  bool empty() const { return total_ == 0; }
  const std::map<Message, int64_t>& counts() const { return counts_; }

  friend bool operator==(const TranscriptHistogram&,
                         const TranscriptHistogram&) = default;

 private:
  std::map<Message, int64_t> counts_;
  int64_t total_ = 0;
};

// Public random string shared by all parties. Derived objects are built on
// first use and cached.
class PublicRandomness {
 public:
  explicit PublicRandomness(std::string seed) : seed_(std::move(seed)) {}

  const std::string& seed() const { return seed_; }
  // Independent 64-bit key for the derived object named `label`.
  uint64_t Key(std::string_view label) const;

  // Seeded hash of arbitrary 64-bit inputs into [1, n].
  int64_t Mapping(int64_t n, uint64_t x) const;
  // Permutations up to this size are materialized by Fisher-Yates.
  static constexpr int64_t kMaxPermutationTable = 10'000'000;

  // pi(i) for a seeded permutation of [1, n]: uniform via an explicit array
  // up to kMaxPermutationTable, a keyed Feistel bijection above it.
  int64_t Permute(int64_t n, int64_t i) const;

 private:
  const std::vector<int64_t>& PermutationTable(int64_t n) const;

  std::string seed_;
  mutable std::map<int64_t, std::shared_ptr<const std::vector<int64_t>>>
      permutations_;
};

// A shuffle-model local randomizer: maps one input to a multiset of
// messages. The public argument may be null in the private-coin setting.
using ShuffleRandomizer = std::function<absl::StatusOr<TranscriptHistogram>(
    int64_t input, const PublicRandomness* pub, Rng& rng)>;

// Runs every user's randomizer on its own stream (root seed, user index) and
// returns the union of the outputs.
absl::StatusOr<TranscriptHistogram> RunShuffle(
    const ShuffleRandomizer& randomizer, const Dataset& dataset,
    const PublicRandomness* pub, uint64_t seed);

// Local model: outputs kept in user order.
template <typename Output>
using LocalRandomizer = std::function<absl::StatusOr<Output>(
    int64_t input, const PublicRandomness* pub, Rng& rng)>;

template <typename Output>
absl::StatusOr<std::vector<Output>> RunLocal(
    const LocalRandomizer<Output>& randomizer, const Dataset& dataset,
    const PublicRandomness* pub, uint64_t seed) {
  std::vector<Output> out;
  out.reserve(dataset.size());
  for (int64_t i = 0; i < dataset.size(); ++i) {
    Rng rng = StreamRng(seed, static_cast<uint64_t>(i));
    auto r = randomizer(dataset[i], pub, rng);
    if (!r.ok()) return r.status();
    out.push_back(*std::move(r));
  }
  return out;
}

}  // namespace shuffledp

#endif  // SHUFFLEDP_SHUFFLE_CORE_H_
