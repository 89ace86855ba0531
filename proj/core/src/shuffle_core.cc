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

#include "shuffledp/shuffle_core.h"

#include <numeric>
#include <sstream>
#include <unordered_set>

#include "absl/strings/str_cat.h"

namespace shuffledp {

absl::StatusOr<Dataset> Dataset::Create(int64_t universe_size,
                                        std::vector<int64_t> entries) {
  if (universe_size < 0) {
    return absl::InvalidArgumentError("negative universe size");
  }
  for (int64_t x : entries) {
    if (x < 0 || x > universe_size) {
      return absl::OutOfRangeError(
          absl::StrCat("entry ", x, " outside {0} U [", universe_size, "]"));
    }
  }
  return Dataset(universe_size, std::move(entries));
}

int64_t Dataset::DistinctNonzero() const {
  std::unordered_set<int64_t> seen;
  for (int64_t x : entries_) {
    if (x != 0) seen.insert(x);
  }
  return static_cast<int64_t>(seen.size());
}

void Dataset::Write(std::ostream& out) const {
  out << "D=" << universe_size_ << " n=" << entries_.size() << "\n";
  for (int64_t x : entries_) out << x << "\n";
}

absl::StatusOr<Dataset> Dataset::Read(std::istream& in) {
  std::string header;
  if (!std::getline(in, header)) {
    return absl::InvalidArgumentError("missing dataset header");
  }
  int64_t d = -1, n = -1;
  std::istringstream hs(header);
  std::string tok;
  while (hs >> tok) {
    if (tok.rfind("D=", 0) == 0) d = std::stoll(tok.substr(2));
    if (tok.rfind("n=", 0) == 0) n = std::stoll(tok.substr(2));
  }
  if (d < 0 || n < 0) {
    return absl::InvalidArgumentError("header must read D=<int> n=<int>");
  }
  std::vector<int64_t> entries;
  entries.reserve(n);
  int64_t x;
  while (in >> x) entries.push_back(x);
  if (static_cast<int64_t>(entries.size()) != n) {
    return absl::InvalidArgumentError(absl::StrCat(
        "header declares ", n, " entries, found ", entries.size()));
  }
  return Create(d, std::move(entries));
}

absl::StatusOr<Dataset> Neighboring(const Dataset& dataset, int64_t index,
                                    int64_t new_value) {
  if (index < 0 || index >= dataset.size()) {
    return absl::OutOfRangeError(absl::StrCat("index ", index));
  }
  std::vector<int64_t> entries = dataset.entries();
  entries[index] = new_value;
  return Dataset::Create(dataset.universe_size(), std::move(entries));
}

void TranscriptHistogram::Add(Message m, int64_t count) {
  if (count == 0) return;
  counts_[m] += count;
  total_ += count;
}

void TranscriptHistogram::Merge(const TranscriptHistogram& other) {
  for (const auto& [m, c] : other.counts_) counts_[m] += c;
  total_ += other.total_;
}

int64_t TranscriptHistogram::count(Message m) const {
  auto it = counts_.find(m);
  return it == counts_.end() ? 0 : it->second;
}

uint64_t PublicRandomness::Key(std::string_view label) const {
  return Mix64(HashBytes(seed_) ^ HashBytes(label));
}

int64_t PublicRandomness::Mapping(int64_t n, uint64_t x) const {
  const uint64_t h = Mix64(Key("mapping") ^ Mix64(x));
  return static_cast<int64_t>(
             (static_cast<unsigned __int128>(h) * static_cast<uint64_t>(n)) >>
             64) +
         1;
}

const std::vector<int64_t>& PublicRandomness::PermutationTable(
    int64_t n) const {
  auto it = permutations_.find(n);
  if (it != permutations_.end()) return *it->second;
  auto table = std::make_shared<std::vector<int64_t>>(n);
  std::iota(table->begin(), table->end(), int64_t{1});
  Rng rng = StreamRng(Key("permutation"), static_cast<uint64_t>(n));
  for (int64_t i = n - 1; i > 0; --i) {
    const int64_t j = static_cast<int64_t>(UniformIndex(rng, i + 1));
    std::swap((*table)[i], (*table)[j]);
  }
  return *permutations_.emplace(n, std::move(table)).first->second;
}

int64_t PublicRandomness::Permute(int64_t n, int64_t i) const {
  if (n <= kMaxPermutationTable) return PermutationTable(n)[i - 1];
  // Keyed balanced Feistel network on 2h bits, cycle-walked into [0, n).
  int half_bits = 1;
  while ((uint64_t{1} << (2 * half_bits)) < static_cast<uint64_t>(n)) {
    ++half_bits;
  }
  const uint64_t mask = (uint64_t{1} << half_bits) - 1;
  const uint64_t key = Key("permutation") ^ Mix64(static_cast<uint64_t>(n));
  uint64_t v = static_cast<uint64_t>(i - 1);
  do {
    uint64_t left = v >> half_bits, right = v & mask;
    for (uint64_t round = 0; round < 6; ++round) {
      const uint64_t f = Mix64(key ^ Mix64(right + (round << 58))) & mask;
      const uint64_t next = left ^ f;
      left = right;
      right = next;
    }
    v = (left << half_bits) | right;
  } while (v >= static_cast<uint64_t>(n));
  return static_cast<int64_t>(v) + 1;
}

absl::StatusOr<TranscriptHistogram> RunShuffle(
    const ShuffleRandomizer& randomizer, const Dataset& dataset,
    const PublicRandomness* pub, uint64_t seed) {
  TranscriptHistogram out;
  for (int64_t i = 0; i < dataset.size(); ++i) {
    Rng rng = StreamRng(seed, static_cast<uint64_t>(i));
    auto messages = randomizer(dataset[i], pub, rng);
    if (!messages.ok()) return messages.status();
    out.Merge(*messages);
  }
  return out;
}

}  // namespace shuffledp
